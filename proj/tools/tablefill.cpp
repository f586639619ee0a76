#include <iostream>
#include <string>
#include <vector>

#include "tablefill/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tablefill::run_cli(args, std::cout, std::cerr);
}
