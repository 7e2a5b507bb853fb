#include <iostream>

#include "ordvi/cli.hpp"

int main(int argc, char** argv) { return ordvi::runCli(argc, argv, std::cout, std::cerr); }
