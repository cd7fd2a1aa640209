#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return bbctl::run(argc, argv, std::cout, std::cerr); }
