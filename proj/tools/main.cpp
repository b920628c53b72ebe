#include <iostream>

#include "skintex/cli.hpp"

int main(int argc, char** argv) {
  return skintex::cli::run(argc, argv, std::cout, std::cerr);
}
