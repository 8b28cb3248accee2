#include <iostream>

#include "sag/experiments.hpp"

int main(int argc, char** argv) {
  return sag::run_cli(argc, argv, std::cout, std::cerr);
}
