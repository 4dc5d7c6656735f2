#include <iostream>

#include "lrvec/cli.hpp"

int main(int argc, char** argv) { return lrvec::run_cli(argc, argv, std::cout, std::cerr); }
