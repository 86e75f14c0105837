#include <iostream>

#include "treg/cli.hpp"

int main(int argc, char** argv) {
  return treg::cli::cli_main(argc, argv, std::cout, std::cerr);
}
