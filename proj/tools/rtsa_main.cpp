#include <iostream>
#include <string>
#include <vector>

#include "rtsa/cli.hpp"

int main(int argc, char** argv) {
  return rtsa::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
