#include <iostream>
#include <string>
#include <vector>

#include "crosspath/cli/app.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return crosspath::cli::run(args, std::cout, std::cerr);
}
