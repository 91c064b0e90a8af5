#include <iostream>

#include "vada/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return vada::cli::main(args, std::cout, std::cerr);
}
