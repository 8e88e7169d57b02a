#include <iostream>
#include <string>
#include <vector>

#include "gauss_ad/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gauss_ad::cli::run(args, std::cout, std::cerr);
}
