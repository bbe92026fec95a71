#include <iostream>

#include "twistlap/cli.hpp"

int main(int argc, char** argv) { return twistlap::cli::cli_main(argc, argv, std::cout, std::cerr); }
