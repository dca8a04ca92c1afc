#include <iostream>

#include "qnm/cli.hpp"

int main(int argc, char** argv) { return qnm::cli::run(argc, argv, std::cout, std::cerr); }
