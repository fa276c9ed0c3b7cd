#pragma once

// Inner-loop kernels with a scalar reference and an AVX2 variant chosen at
// runtime. Every variant performs the same floating-point operations in the
// same order, so results are bit-identical across variants:
//
//  * dot() accumulates into four interleaved partial sums (lane l takes
//    elements i with i % 4 == l over the 4-aligned prefix), combines them as
//    (s0 + s1) + (s2 + s3) and then adds the tail sequentially.
//  * axpy(), scale() and adam_update() are element-wise.
//
// No variant may use fused multiply-add; the build passes -ffp-contract=off.

#include <cstddef>
#include <string_view>

namespace seq2rdf::simd {

enum class Level { kScalar, kAvx2 };

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double one_minus_beta1;
  double one_minus_beta2;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
  double epsilon;
};

struct KernelTable {
  Level level;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y *= alpha
  void (*scale)(double alpha, double* y, std::size_t n);
  void (*adam_update)(double* param, const double* grad, double* m, double* v,
                      std::size_t n, const AdamCoeffs& c);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* kernels_for(Level level);

bool cpu_supports(Level level);

// Best level supported by this CPU, unless the SEQ2RDF_SIMD environment
// variable is set to "scalar".
Level detect_level();

// Kernel table used by the numerics layer.
const KernelTable& active();

// Switches the active table. Throws seq2rdf::Error if unsupported.
void set_level(Level level);

std::string_view level_name(Level level);

// Restores the previous level on destruction; for tests.
class ScopedLevel {
 public:
  explicit ScopedLevel(Level level);
  ~ScopedLevel();
  ScopedLevel(const ScopedLevel&) = delete;
  ScopedLevel& operator=(const ScopedLevel&) = delete;

 private:
  Level previous_;
};

}  // namespace seq2rdf::simd
