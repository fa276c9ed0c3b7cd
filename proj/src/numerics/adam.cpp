#include "seq2rdf/numerics/adam.hpp"

#include <cmath>

#include "seq2rdf/error.hpp"
#include "seq2rdf/numerics/kernels.hpp"

namespace seq2rdf {

AdamState::AdamState(const AdamConfig& config, std::span<const Tensor2* const> params)
    : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor2* p : params) {
    m_.emplace_back(p->rows(), p->cols());
    v_.emplace_back(p->rows(), p->cols());
  }
}

void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2* const> grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m_.size()) {
    throw Error("adam_step: expected " + std::to_string(state.m_.size()) +
                " tensors, got params=" + std::to_string(params.size()) +
                " grads=" + std::to_string(grads.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k]->same_shape(*grads[k]) || !params[k]->same_shape(state.m_[k])) {
      throw Error("adam_step: shape mismatch at tensor " + std::to_string(k) + ": param " +
                  params[k]->shape_string() + ", grad " + grads[k]->shape_string() +
                  ", state " + state.m_[k].shape_string());
    }
  }

  state.step_ += 1;
  const auto& cfg = state.config_;
  const double t = static_cast<double>(state.step_);
  const simd::AdamCoeffs coeffs{cfg.lr,
                                cfg.beta1,
                                cfg.beta2,
                                1.0 - cfg.beta1,
                                1.0 - cfg.beta2,
                                1.0 - std::pow(cfg.beta1, t),
                                1.0 - std::pow(cfg.beta2, t),
                                cfg.epsilon};
  const auto& k = simd::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    k.adam_update(params[i]->data(), grads[i]->data(), state.m_[i].data(), state.v_[i].data(),
                  params[i]->size(), coeffs);
  }
}

}  // namespace seq2rdf
