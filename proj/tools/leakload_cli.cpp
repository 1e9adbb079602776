#include <iostream>

#include "leakload/cli.hpp"

int main(int argc, char** argv) { return leakload::cli::run_cli(argc, argv, std::cout, std::cerr); }
