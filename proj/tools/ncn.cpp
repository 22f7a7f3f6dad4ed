#include <iostream>

#include "ncn_cli.hpp"

int main(int argc, char** argv) { return ncn::cli::run(argc, argv, std::cout, std::cerr); }
