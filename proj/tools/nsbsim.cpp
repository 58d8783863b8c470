#include <iostream>

#include "nsbavoid/cli.hpp"

int main(int argc, char** argv) { return nsbavoid::run_cli(argc, argv, std::cout, std::cerr); }
