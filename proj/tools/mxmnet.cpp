#include "mxm/commands.hpp"

#include <iostream>

int main(int argc, char **argv) { return mxm::run_cli(argc, argv, std::cout, std::cerr); }
