#include "floqnet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return floqnet::cli::run(argc, argv, std::cout, std::cerr);
}
