#include "hypoco/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hypoco::run_cli(argc, argv, std::cout, std::cerr); }
