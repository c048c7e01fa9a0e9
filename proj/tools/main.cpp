#include <iostream>

#include "ctsa/cli/cli.hpp"

int main(int argc, char** argv) { return ctsa::cli::run_cli(argc, argv, std::cout, std::cerr); }
