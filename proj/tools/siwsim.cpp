#include <iostream>

#include "siwsim/cli.hpp"

int main(int argc, char** argv) {
  return siwsim::cli::cli_main(argc, argv, std::cout, std::cerr);
}
