#include <iostream>

#include "signalopt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return signalopt::run_cli(args, std::cout, std::cerr);
}
