#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seq2rdf/numerics/rng.hpp"
#include "seq2rdf/numerics/tensor.hpp"

namespace seq2rdf {

enum class Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

// Standard LSTM cell without peepholes. Every gate reads the concatenation
// [x; h_prev], so each gate matrix is hidden x (input + hidden).
struct LstmWeights {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::array<Tensor2, 4> w;     // indexed by Gate
  std::array<Tensor2, 4> bias;  // 1 x hidden each

  static LstmWeights zeros(std::size_t input_dim, std::size_t hidden_dim);
  // uniform(-scale, scale) weights, zero biases except forget = 1.
  static LstmWeights random(std::size_t input_dim, std::size_t hidden_dim, SeededRng& rng,
                            double scale = 0.08);

  Tensor2& gate(Gate g) { return w[static_cast<std::size_t>(g)]; }
  const Tensor2& gate(Gate g) const { return w[static_cast<std::size_t>(g)]; }
  Tensor2& gate_bias(Gate g) { return bias[static_cast<std::size_t>(g)]; }
  const Tensor2& gate_bias(Gate g) const { return bias[static_cast<std::size_t>(g)]; }

  // Appends the eight tensors as "<prefix>.W_i", "<prefix>.b_i", ...
  void append_tensors(const std::string& prefix, std::vector<NamedTensor>& out);
  void append_tensors(const std::string& prefix, std::vector<ConstNamedTensor>& out) const;

  bool operator==(const LstmWeights&) const = default;
};

struct LstmCache {
  Vec z;  // [x; h_prev]
  Vec i, f, o, g;
  Vec c_prev;
  Vec c;
  Vec tanh_c;
};

struct LstmStep {
  Vec h;
  Vec c;
  LstmCache cache;
};

struct LstmInputGrads {
  Vec dx;
  Vec dh_prev;
  Vec dc_prev;
};

LstmStep lstm_cell(std::span<const double> x, std::span<const double> h_prev,
                   std::span<const double> c_prev, const LstmWeights& w);

// Backpropagates dh/dc (gradients arriving at the step outputs) through one
// cell. Weight gradients are accumulated into `grads`.
LstmInputGrads lstm_cell_backward(std::span<const double> dh, std::span<const double> dc,
                                  const LstmCache& cache, const LstmWeights& w,
                                  LstmWeights& grads);

}  // namespace seq2rdf
