#include <iostream>
#include <string>
#include <vector>

#include "branchbayes/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return branchbayes::run(args, std::cout, std::cerr);
}
