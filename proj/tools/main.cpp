#include <iostream>

#include "coldpref/cli.hpp"

int main(int argc, char** argv) { return coldpref::cli::run(argc, argv, std::cout, std::cerr); }
