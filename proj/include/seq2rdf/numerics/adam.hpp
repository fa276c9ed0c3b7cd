#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seq2rdf/numerics/tensor.hpp"

namespace seq2rdf {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment tables shaped like the parameter set they were built
// for, plus the step counter.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const AdamConfig& config, std::span<const Tensor2* const> params);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  const std::vector<Tensor2>& first_moment() const { return m_; }
  const std::vector<Tensor2>& second_moment() const { return v_; }

  bool operator==(const AdamState&) const = default;

 private:
  friend void adam_step(std::span<Tensor2* const>, std::span<const Tensor2* const>, AdamState&);

  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor2> m_;
  std::vector<Tensor2> v_;
};

inline bool operator==(const AdamConfig& a, const AdamConfig& b) {
  return a.lr == b.lr && a.beta1 == b.beta1 && a.beta2 == b.beta2 && a.epsilon == b.epsilon;
}

// One bias-corrected Adam update. Rejects any shape disagreement between
// params, grads and the state.
void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2* const> grads,
               AdamState& state);

}  // namespace seq2rdf
