#include <iostream>
#include <string>
#include <vector>

#include "semplan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return semplan::cli::run(args, std::cout, std::cerr);
}
