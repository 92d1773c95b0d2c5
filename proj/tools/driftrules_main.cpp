#include <iostream>

#include "driftrules/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return driftrules::run_cli(args, std::cout, std::cerr);
}
