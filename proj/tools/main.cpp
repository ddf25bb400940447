#include <iostream>

#include "uiprobe/cli.hpp"

int main(int argc, char** argv) {
  return uiprobe::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
