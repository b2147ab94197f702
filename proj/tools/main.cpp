#include <iostream>

#include "csel/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return csel::cli_dispatch(args, std::cout, std::cerr);
}
