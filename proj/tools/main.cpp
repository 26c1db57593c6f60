#include <vector>

#include "cli_main.hpp"

int main(int argc, char** argv) {
  return metral::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
