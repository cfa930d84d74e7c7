#include <string>
#include <vector>

#include "mccsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mccsim::run_cli(args);
}
