#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "seq2rdf/log.hpp"

int main(int argc, char** argv) {
  seq2rdf::log::set_level(seq2rdf::log::Level::kQuiet);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
