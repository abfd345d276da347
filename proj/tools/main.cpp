#include <iostream>

#include "ringloc/cli/cli.hpp"

int main(int argc, char** argv) { return ringloc::cli::run_cli(argc, argv, std::cout, std::cerr); }
