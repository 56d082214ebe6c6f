#pragma once

#include <ostream>

namespace vpk
{
enum ExitCode : int
{
        kExitOk = 0,
        kExitThreshold = 1,
        kExitConfig = 2,
        kExitIo = 3,
        kExitShape = 4
};

/// Entry point of the vpk tool. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}
