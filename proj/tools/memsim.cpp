#include <string>
#include <vector>

#include "memsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return memsim::shell::run(args);
}
