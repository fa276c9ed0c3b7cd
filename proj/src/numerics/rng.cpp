#include "seq2rdf/numerics/rng.hpp"

#include <limits>

namespace seq2rdf {

std::size_t SeededRng::index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = next_u64();
  while (draw >= limit) draw = next_u64();
  return static_cast<std::size_t>(draw % bound);
}

SeededRng SeededRng::derive(std::uint64_t stream) const {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return SeededRng(z ^ (z >> 31));
}

}  // namespace seq2rdf
