#include <vpk/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
        return vpk::run_cli(argc, argv, std::cout, std::cerr);
}
