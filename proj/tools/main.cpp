#include <iostream>

#include "gfmlab/cli.hpp"

int main(int argc, char** argv) { return gfmlab::run_cli(argc, argv, std::cout, std::cerr); }
