#include <iostream>
#include <string>
#include <vector>

#include "phl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return phl::run_cli(args, std::cout, std::cerr);
}
