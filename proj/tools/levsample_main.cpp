#include <iostream>

#include "levsample/cli.hpp"

int main(int argc, char** argv) {
  return levsample::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
