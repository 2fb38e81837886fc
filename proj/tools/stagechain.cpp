#include <iostream>

#include "stagechain/cli.hpp"

int main(int argc, char** argv) {
    return stagechain::cli::run(argc, argv, std::cout, std::cerr);
}
