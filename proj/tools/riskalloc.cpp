#include <iostream>

#include "riskalloc/cli/commands.hpp"

int main(int argc, char** argv) { return riskalloc::cli::run(argc, argv, std::cout, std::cerr); }
