#include <iostream>

#include "timeaware/cli.hpp"

int main(int argc, char** argv) { return timeaware::cli::main(argc, argv, std::cout, std::cerr); }
