#include <iostream>
#include <string>
#include <vector>

#include "bmc/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bmc::run_cli(args, std::cout, std::cerr);
}
