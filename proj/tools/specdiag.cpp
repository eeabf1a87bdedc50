#include <iostream>

#include "specdiag/cli.hpp"

int main(int argc, char** argv) { return specdiag::run_cli(argc, argv, std::cout, std::cerr); }
