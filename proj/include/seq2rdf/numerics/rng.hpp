#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace seq2rdf {

// Deterministic generator. The engine sequence is fixed by the C++ standard;
// the real and integer conversions below are written out by hand because the
// standard distributions are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, n); rejection sampling keeps it unbiased. n must be > 0.
  std::size_t index(std::size_t n);

  bool coin() { return (next_u64() >> 63) != 0; }

  // Independent stream derived from this generator's seed.
  SeededRng derive(std::uint64_t stream) const;

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace seq2rdf
