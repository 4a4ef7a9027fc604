#include <iostream>

#include "hopfid_cli.hpp"

int main(int argc, char** argv) { return hopfid::cli::run(argc, argv, std::cout, std::cerr); }
