#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace seq2rdf {

using Vec = std::vector<double>;

// Dense row-major matrix of 64-bit reals. Vectors that act as parameters
// (biases) are stored as 1 x n tensors so that every trainable quantity has
// the same type.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Tensor2 identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  void fill(double v);
  bool same_shape(const Tensor2& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;
  std::string shape_string() const;

  bool operator==(const Tensor2& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Throws seq2rdf::Error naming `what` if any value is NaN or infinite.
void require_finite(const Tensor2& t, const char* what);
void require_finite(std::span<const double> v, const char* what);

}  // namespace seq2rdf

namespace seq2rdf {

// Non-owning handle used to walk a parameter set in a fixed order.
struct NamedTensor {
  std::string name;
  Tensor2* tensor;
};

struct ConstNamedTensor {
  std::string name;
  const Tensor2* tensor;
};

}  // namespace seq2rdf
