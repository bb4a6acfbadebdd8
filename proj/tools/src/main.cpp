#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return devquad::cli_dispatch(argc, argv, std::cout, std::cerr); }
