// Command-line entry point for the scheduling toolkit.

#include <iostream>

#include "sdiom/cli.hpp"

int main(int argc, char** argv) {
  return sdiom::cli::run(argc, argv, std::cout, std::cerr);
}
