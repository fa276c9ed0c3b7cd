#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "seq2rdf/numerics/tensor.hpp"

namespace seq2rdf {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  // Location of the worst coordinate.
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Relative error used by the checker: |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

// Central differences (f(w + eps) - f(w - eps)) / (2 eps) for every
// coordinate of `params`, compared against `analytic`. Rejects a non-finite
// loss.
GradCheckReport grad_check_fd(const std::function<double(std::span<const double>)>& loss_fn,
                              std::span<const double> params, std::span<const double> analytic,
                              double eps);

// Same check over a set of tensors that `loss_fn` reads in place. Each
// coordinate is perturbed and restored bit-exactly.
GradCheckReport grad_check_fd(const std::function<double()>& loss_fn,
                              std::span<const NamedTensor> params,
                              std::span<const Tensor2* const> analytic, double eps);

}  // namespace seq2rdf
