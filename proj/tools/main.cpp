#include "stablesde/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return stablesde::cli::run(argc, argv, std::cout, std::cerr); }
