#include <iostream>

#include "signface/cli.hpp"

int main(int argc, char** argv) {
  return signface::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
