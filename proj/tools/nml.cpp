#include <iostream>

#include "nml_cli.hpp"

int main(int argc, char** argv) { return nml::cli::run(argc, argv, std::cout, std::cerr); }
