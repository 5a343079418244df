#include <iostream>
#include <string>
#include <vector>

#include "ffrx/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return ffrx::run_cli(args, std::cout, std::cerr);
}
