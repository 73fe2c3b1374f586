#include <iostream>

#include "catcov/cli.hpp"

int main(int argc, char** argv) { return catcov::run_cli(argc, argv, std::cout, std::cerr); }
