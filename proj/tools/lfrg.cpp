#include <iostream>

#include "lfrg/cli.hpp"

int main(int argc, char** argv) { return lfrg::cli::entry(argc, argv, std::cout, std::cerr); }
