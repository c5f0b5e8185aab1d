#include <iostream>

#include "apml/cli.hpp"

int main(int argc, char **argv) {
  return apml::run_cli(argc, argv, std::cout, std::cerr);
}
