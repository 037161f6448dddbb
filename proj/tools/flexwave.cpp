#include <iostream>

#include "flexwave/cli/commands.hpp"

int main(int argc, char** argv) { return flexwave::cli::run(argc, argv, std::cout, std::cerr); }
