#include <iostream>

#include "desklab/cli/cli.hpp"

int main(int argc, char** argv) { return desklab::cli::main(argc, argv, std::cout, std::cerr); }
