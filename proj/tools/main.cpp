#include <iostream>

#include "sfod/cli.hpp"

int main(int argc, char** argv) { return sfod::run_cli(argc, argv, std::cout, std::cerr); }
