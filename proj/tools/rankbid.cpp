#include <iostream>

#include "rankbid/cli.hpp"

int main(int argc, char** argv) { return rankbid::cli::run(argc, argv, std::cout, std::cerr); }
