#include "thyrofna/cli/commands.hpp"

#include <iostream>

int main(int argc, char **argv) { return thyrofna::cli::run_cli(argc, argv, std::cout, std::cerr); }
