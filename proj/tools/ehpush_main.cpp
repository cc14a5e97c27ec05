#include <string>
#include <vector>

#include "ehpush/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ehpush::cli::run_cli(args);
}
