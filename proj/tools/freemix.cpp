#include <iostream>

#include "freemix/cli.hpp"

int main(int argc, char** argv) { return freemix::cli::run(argc, argv, std::cout, std::cerr); }
