#include "seq2rdf/numerics/tensor.hpp"

#include <cmath>

#include "seq2rdf/error.hpp"

namespace seq2rdf {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw Error("tensor value count " + std::to_string(values_.size()) +
                " does not match shape " + shape_string());
  }
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor2::fill(double v) {
  for (auto& x : values_) x = v;
}

bool Tensor2::all_finite() const {
  for (double x : values_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor2::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_finite(const Tensor2& t, const char* what) {
  if (!t.all_finite()) throw Error(std::string(what) + ": non-finite value");
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(std::string(what) + ": non-finite value");
  }
}

}  // namespace seq2rdf
