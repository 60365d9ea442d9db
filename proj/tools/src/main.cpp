#include <iostream>

#include "gfanm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gfanm::cli::run(args, std::cout, std::cerr);
}
