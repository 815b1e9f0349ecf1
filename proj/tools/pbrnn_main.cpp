#include <string>
#include <vector>

#include "pbrnn/cli.hpp"

int main(int argc, char** argv) {
  return pbrnn::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
