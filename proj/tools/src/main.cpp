#include <iostream>

#include "ccpath/cli.hpp"

int main(int argc, char** argv) { return ccpath::run(argc, argv, std::cout, std::cerr); }
