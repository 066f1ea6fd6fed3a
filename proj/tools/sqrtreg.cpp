#include <iostream>

#include "sqrtreg/cli.hpp"

int main(int argc, char** argv) { return sqrtreg::dispatch(argc, argv, std::cout, std::cerr); }
