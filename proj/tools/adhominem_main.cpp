#include <iostream>
#include <string>
#include <vector>

#include "adhominem/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adhominem::cli::command_dispatch(args, std::cout, std::cerr);
}
