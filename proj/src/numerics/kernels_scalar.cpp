#include <cmath>

#include "kernels_internal.hpp"

namespace seq2rdf::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = s0 + a[i] * b[i];
    s1 = s1 + a[i + 1] * b[i + 1];
    s2 = s2 + a[i + 2] * b[i + 2];
    s3 = s3 + a[i + 3] * b[i + 3];
  }
  double sum = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_scalar(double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] * alpha;
}

void adam_scalar(double* p, const double* g, double* m, double* v, std::size_t n,
                 const AdamCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + c.one_minus_beta1 * g[i];
    v[i] = c.beta2 * v[i] + c.one_minus_beta2 * (g[i] * g[i]);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    p[i] = p[i] - (c.lr * m_hat) / (std::sqrt(v_hat) + c.epsilon);
  }
}

constexpr KernelTable kScalarTable{Level::kScalar, "scalar", dot_scalar,
                                   axpy_scalar,    scale_scalar, adam_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace seq2rdf::simd
