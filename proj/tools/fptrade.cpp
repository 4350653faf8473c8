#include <iostream>

#include "fptrade/cli.hpp"

int main(int argc, char** argv) { return fptrade::cli::run(argc, argv, std::cout, std::cerr); }
