#include <iostream>

#include "tnlab/cli.hpp"

int main(int argc, char** argv) { return tnlab::cli::run(argc, argv, std::cout, std::cerr); }
