#include <iostream>

#include "dlab/cli.hpp"

int main(int argc, char** argv) { return dlab::cli::run(argc, argv, std::cout, std::cerr); }
