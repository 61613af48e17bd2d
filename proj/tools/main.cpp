#include <iostream>

#include "scanner.hpp"

int main(int argc, char** argv) { return ptsw::cli::run(argc, argv, std::cout, std::cerr); }
