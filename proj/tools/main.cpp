#include <iostream>
#include <string>
#include <vector>

#include "dsopt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dsopt::run_cli(args, std::cout, std::cerr);
}
