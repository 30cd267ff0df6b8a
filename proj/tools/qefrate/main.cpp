#include <iostream>

#include "qefrate/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qefrate::run(args, std::cout, std::cerr);
}
