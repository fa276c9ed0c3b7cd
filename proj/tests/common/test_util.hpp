#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "seq2rdf/numerics/rng.hpp"
#include "seq2rdf/numerics/tensor.hpp"

namespace testutil {

inline seq2rdf::Tensor2 random_tensor(std::size_t r, std::size_t c, seq2rdf::SeededRng& rng,
                                      double scale = 1.0) {
  seq2rdf::Tensor2 t(r, c);
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

inline seq2rdf::Vec random_vec(std::size_t n, seq2rdf::SeededRng& rng, double scale = 1.0) {
  seq2rdf::Vec v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("seq2rdf_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testutil
