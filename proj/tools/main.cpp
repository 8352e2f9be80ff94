#include "fatgraph/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fatgraph::cli::run(argc, argv, std::cout, std::cerr); }
