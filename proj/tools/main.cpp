#include <string>
#include <vector>

#include "harvest/cli.hpp"

int main(int argc, char** argv) {
  return harvest::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
