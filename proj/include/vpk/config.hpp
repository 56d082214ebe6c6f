#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vpk
{
class ConfigError : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

/// Flat `key = value` text: one pair per line, `#` comments, optional double quotes around the
/// value. Keys may not repeat. Throws ConfigError with the offending line number.
std::map<std::string, std::string> parse_config(std::string_view text);

}
