#include <vpk/config.hpp>

#include <cctype>

namespace vpk
{
namespace
{
std::string_view trim(std::string_view s)
{
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        {
                s.remove_prefix(1);
        }
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        {
                s.remove_suffix(1);
        }
        return s;
}

bool valid_key(std::string_view k)
{
        if (k.empty())
        {
                return false;
        }
        for (char c : k)
        {
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
                {
                        return false;
                }
        }
        return true;
}
}

std::map<std::string, std::string> parse_config(std::string_view text)
{
        std::map<std::string, std::string> out;
        int line_no = 0;
        while (!text.empty())
        {
                ++line_no;
                const auto eol = text.find('\n');
                std::string_view line = text.substr(0, eol);
                text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

                line = trim(line);
                if (line.empty() || line.front() == '#')
                {
                        continue;
                }
                const auto eq = line.find('=');
                if (eq == std::string_view::npos)
                {
                        throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
                }
                const std::string_view key = trim(line.substr(0, eq));
                std::string_view value = trim(line.substr(eq + 1));
                if (!valid_key(key))
                {
                        throw ConfigError("line " + std::to_string(line_no) + ": invalid key '" + std::string(key) + "'");
                }
                if (!value.empty() && value.front() == '"')
                {
                        const auto close = value.find('"', 1);
                        if (close == std::string_view::npos)
                        {
                                throw ConfigError("line " + std::to_string(line_no) + ": unterminated quote");
                        }
                        const std::string_view rest = trim(value.substr(close + 1));
                        if (!rest.empty() && rest.front() != '#')
                        {
                                throw ConfigError("line " + std::to_string(line_no) + ": text after quoted value");
                        }
                        value = value.substr(1, close - 1);
                }
                else if (const auto hash = value.find('#'); hash != std::string_view::npos)
                {
                        value = trim(value.substr(0, hash));
                }
                if (!out.emplace(std::string(key), std::string(value)).second)
                {
                        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
                }
        }
        return out;
}

}
