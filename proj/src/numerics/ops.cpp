#include "seq2rdf/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "seq2rdf/error.hpp"
#include "seq2rdf/numerics/kernels.hpp"

namespace seq2rdf {

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw Error("matmul: shape mismatch " + a.shape_string() + " x " + b.shape_string());
  }
  require_finite(a, "matmul lhs");
  require_finite(b, "matmul rhs");
  const auto& k = simd::active();
  Tensor2 out(a.rows(), b.cols());
  // Row i of the result is accumulated as sum_k a(i,k) * b.row(k), which keeps
  // the per-element summation order of the textbook triple loop.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t kk = 0; kk < a.cols(); ++kk) {
      k.axpy(a(i, kk), b.row(kk).data(), dst, b.cols());
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  }
  return simd::active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw Error("axpy: length mismatch " + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()));
  }
  simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

void matvec(const Tensor2& w, std::span<const double> x, std::span<double> y) {
  if (w.cols() != x.size() || w.rows() != y.size()) {
    throw Error("matvec: " + w.shape_string() + " applied to length " +
                std::to_string(x.size()) + " into length " + std::to_string(y.size()));
  }
  const auto& k = simd::active();
  for (std::size_t r = 0; r < w.rows(); ++r) y[r] = k.dot(w.row(r).data(), x.data(), x.size());
}

void matvec_transposed_add(const Tensor2& w, std::span<const double> v, std::span<double> y) {
  if (w.rows() != v.size() || w.cols() != y.size()) {
    throw Error("matvec_transposed_add: " + w.shape_string() + " with lengths " +
                std::to_string(v.size()) + ", " + std::to_string(y.size()));
  }
  const auto& k = simd::active();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (v[r] != 0.0) k.axpy(v[r], w.row(r).data(), y.data(), y.size());
  }
}

void outer_add(Tensor2& g, std::span<const double> a, std::span<const double> b) {
  if (g.rows() != a.size() || g.cols() != b.size()) {
    throw Error("outer_add: " + g.shape_string() + " with lengths " + std::to_string(a.size()) +
                ", " + std::to_string(b.size()));
  }
  const auto& k = simd::active();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    if (a[r] != 0.0) k.axpy(a[r], b.data(), g.row(r).data(), b.size());
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> row) {
  if (row.empty()) return;
  const double peak = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& x : row) {
    x = std::exp(x - peak);
    total += x;
  }
  for (double& x : row) x /= total;
}

Tensor2 softmax_rows(const Tensor2& logits) {
  require_finite(logits, "softmax_rows input");
  Tensor2 out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
  return out;
}

CrossEntropy weighted_cross_entropy(std::span<const double> probs, std::size_t target,
                                    double weight) {
  if (target >= probs.size()) {
    throw Error("weighted_cross_entropy: target " + std::to_string(target) +
                " out of range for " + std::to_string(probs.size()) + " classes");
  }
  CrossEntropy out;
  out.grad.assign(probs.size(), 0.0);
  if (weight == 0.0) return out;
  out.loss = -weight * std::log(probs[target] + kLogFloor);
  for (std::size_t j = 0; j < probs.size(); ++j) out.grad[j] = weight * probs[j];
  out.grad[target] -= weight;
  return out;
}

double global_norm(std::span<const Tensor2* const> tensors) {
  const auto& k = simd::active();
  double sq = 0.0;
  for (const Tensor2* t : tensors) sq += k.dot(t->data(), t->data(), t->size());
  return std::sqrt(sq);
}

double clip_global_norm(std::span<Tensor2* const> tensors, double max_norm) {
  if (!(max_norm > 0.0)) throw Error("clip_global_norm: max_norm must be positive");
  std::vector<const Tensor2*> view(tensors.begin(), tensors.end());
  const double norm = global_norm(view);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    const auto& k = simd::active();
    for (Tensor2* t : tensors) k.scale(factor, t->data(), t->size());
  }
  return norm;
}

}  // namespace seq2rdf
