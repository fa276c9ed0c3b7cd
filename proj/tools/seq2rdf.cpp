#include <iostream>
#include <string>
#include <vector>

#include "seq2rdf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return seq2rdf::cli::dispatch(args, std::cin, std::cout, std::cerr);
}
