#include <iostream>

#include "pqn/cli.hpp"

int main(int argc, char** argv) { return pqn::run_cli(argc, argv, std::cout, std::cerr, std::cin); }
