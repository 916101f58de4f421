#include <iostream>

#include "multiroc/cli.hpp"

int main(int argc, char** argv) { return multiroc::run_cli(argc, argv, std::cout, std::cerr); }
