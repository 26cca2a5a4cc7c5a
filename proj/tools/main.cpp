#include <iostream>

#include "cli_main.hpp"

int main(int argc, char** argv) { return reclab::cli_main(argc, argv, std::cout, std::cerr); }
