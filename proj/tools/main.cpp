#include <iostream>
#include <string>
#include <vector>

#include "cautious/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cautious::run_cli(args, std::cout, std::cerr);
}
