#include <iostream>

#include "mochis/cli.hpp"

int main(int argc, char** argv) { return mochis::cli::run(argc, argv, std::cout, std::cerr); }
