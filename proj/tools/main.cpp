#include <iostream>

#include "matindep/cli.hpp"

int main(int argc, char** argv) {
  return matindep::dispatch(argc, argv, std::cout, std::cerr);
}
