#include <iostream>
#include <string>
#include <vector>

#include "teach/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return teach::cli::run(args, std::cerr);
}
