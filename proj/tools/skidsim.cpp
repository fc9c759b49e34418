#include <string>
#include <vector>

#include "skidsim/cli.hpp"

int main(int argc, char** argv) {
  return skidsim::cli::run(std::vector<std::string>(argv, argv + argc));
}
