#include <string>
#include <vector>

#include "confgate/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return confgate::run_cli(args);
}
