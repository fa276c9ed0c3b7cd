#pragma once

#include <cstddef>
#include <span>

#include "seq2rdf/numerics/tensor.hpp"

namespace seq2rdf {

// Floor added inside logarithms of probabilities.
inline constexpr double kLogFloor = 1e-12;

Tensor2 matmul(const Tensor2& a, const Tensor2& b);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// y = W x
void matvec(const Tensor2& w, std::span<const double> x, std::span<double> y);
// y += W^T v
void matvec_transposed_add(const Tensor2& w, std::span<const double> v, std::span<double> y);
// g += a b^T
void outer_add(Tensor2& g, std::span<const double> a, std::span<const double> b);

double sigmoid(double x);

// Row-wise softmax with max subtraction. Rejects non-finite input.
Tensor2 softmax_rows(const Tensor2& logits);
void softmax_inplace(std::span<double> row);

struct CrossEntropy {
  double loss = 0.0;
  // Gradient with respect to the logits that produced `probs`.
  Vec grad;
};

// loss = -weight * ln(probs[target] + kLogFloor); grad = weight * (probs - onehot).
CrossEntropy weighted_cross_entropy(std::span<const double> probs, std::size_t target,
                                    double weight);

double global_norm(std::span<const Tensor2* const> tensors);

// Rescales every tensor by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm measured before clipping.
double clip_global_norm(std::span<Tensor2* const> tensors, double max_norm);

}  // namespace seq2rdf
