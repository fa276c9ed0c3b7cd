#include "seq2rdf/numerics/lstm.hpp"

#include <cmath>

#include "seq2rdf/error.hpp"
#include "seq2rdf/numerics/ops.hpp"

namespace seq2rdf {
namespace {

constexpr std::array<const char*, 4> kGateSuffix{"i", "f", "o", "g"};

void check_dims(const LstmWeights& w, std::size_t x, std::size_t h, std::size_t c) {
  if (x != w.input_dim || h != w.hidden_dim || c != w.hidden_dim) {
    throw Error("lstm_cell: expected input " + std::to_string(w.input_dim) + " and hidden " +
                std::to_string(w.hidden_dim) + ", got x=" + std::to_string(x) +
                " h=" + std::to_string(h) + " c=" + std::to_string(c));
  }
}

}  // namespace

LstmWeights LstmWeights::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmWeights out;
  out.input_dim = input_dim;
  out.hidden_dim = hidden_dim;
  for (std::size_t k = 0; k < 4; ++k) {
    out.w[k] = Tensor2(hidden_dim, input_dim + hidden_dim);
    out.bias[k] = Tensor2(1, hidden_dim);
  }
  return out;
}

LstmWeights LstmWeights::random(std::size_t input_dim, std::size_t hidden_dim, SeededRng& rng,
                                double scale) {
  LstmWeights out = zeros(input_dim, hidden_dim);
  for (auto& m : out.w) {
    for (double& v : m.values()) v = rng.uniform(-scale, scale);
  }
  out.gate_bias(Gate::kForget).fill(1.0);
  return out;
}

void LstmWeights::append_tensors(const std::string& prefix, std::vector<NamedTensor>& out) {
  for (std::size_t k = 0; k < 4; ++k) {
    out.push_back({prefix + ".W_" + kGateSuffix[k], &w[k]});
    out.push_back({prefix + ".b_" + kGateSuffix[k], &bias[k]});
  }
}

void LstmWeights::append_tensors(const std::string& prefix,
                                 std::vector<ConstNamedTensor>& out) const {
  for (std::size_t k = 0; k < 4; ++k) {
    out.push_back({prefix + ".W_" + kGateSuffix[k], &w[k]});
    out.push_back({prefix + ".b_" + kGateSuffix[k], &bias[k]});
  }
}

LstmStep lstm_cell(std::span<const double> x, std::span<const double> h_prev,
                   std::span<const double> c_prev, const LstmWeights& w) {
  check_dims(w, x.size(), h_prev.size(), c_prev.size());
  const std::size_t hd = w.hidden_dim;
  LstmStep step;
  LstmCache& cache = step.cache;
  cache.z.reserve(x.size() + hd);
  cache.z.assign(x.begin(), x.end());
  cache.z.insert(cache.z.end(), h_prev.begin(), h_prev.end());
  cache.c_prev.assign(c_prev.begin(), c_prev.end());

  std::array<Vec*, 4> act{&cache.i, &cache.f, &cache.o, &cache.g};
  for (std::size_t k = 0; k < 4; ++k) {
    Vec& a = *act[k];
    a.resize(hd);
    matvec(w.w[k], cache.z, a);
    const auto b = w.bias[k].values();
    for (std::size_t r = 0; r < hd; ++r) {
      const double pre = a[r] + b[r];
      a[r] = (k == static_cast<std::size_t>(Gate::kCandidate)) ? std::tanh(pre) : sigmoid(pre);
    }
  }

  cache.c.resize(hd);
  cache.tanh_c.resize(hd);
  step.h.resize(hd);
  for (std::size_t r = 0; r < hd; ++r) {
    cache.c[r] = cache.f[r] * c_prev[r] + cache.i[r] * cache.g[r];
    cache.tanh_c[r] = std::tanh(cache.c[r]);
    step.h[r] = cache.o[r] * cache.tanh_c[r];
  }
  step.c = cache.c;
  return step;
}

LstmInputGrads lstm_cell_backward(std::span<const double> dh, std::span<const double> dc,
                                  const LstmCache& cache, const LstmWeights& w,
                                  LstmWeights& grads) {
  const std::size_t hd = w.hidden_dim;
  if (dh.size() != hd || dc.size() != hd) {
    throw Error("lstm_cell_backward: gradient length does not match hidden size " +
                std::to_string(hd));
  }
  if (!(grads.input_dim == w.input_dim && grads.hidden_dim == hd)) {
    throw Error("lstm_cell_backward: gradient accumulator has mismatched dimensions");
  }

  std::array<Vec, 4> dpre;
  for (auto& v : dpre) v.resize(hd);
  LstmInputGrads out;
  out.dc_prev.resize(hd);
  for (std::size_t r = 0; r < hd; ++r) {
    const double tc = cache.tanh_c[r];
    const double dc_total = dc[r] + dh[r] * cache.o[r] * (1.0 - tc * tc);
    const double d_o = dh[r] * tc;
    const double d_i = dc_total * cache.g[r];
    const double d_g = dc_total * cache.i[r];
    const double d_f = dc_total * cache.c_prev[r];
    out.dc_prev[r] = dc_total * cache.f[r];
    dpre[0][r] = d_i * cache.i[r] * (1.0 - cache.i[r]);
    dpre[1][r] = d_f * cache.f[r] * (1.0 - cache.f[r]);
    dpre[2][r] = d_o * cache.o[r] * (1.0 - cache.o[r]);
    dpre[3][r] = d_g * (1.0 - cache.g[r] * cache.g[r]);
  }

  Vec dz(cache.z.size(), 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    outer_add(grads.w[k], dpre[k], cache.z);
    axpy(1.0, dpre[k], grads.bias[k].values());
    matvec_transposed_add(w.w[k], dpre[k], dz);
  }
  out.dx.assign(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(w.input_dim));
  out.dh_prev.assign(dz.begin() + static_cast<std::ptrdiff_t>(w.input_dim), dz.end());
  return out;
}

}  // namespace seq2rdf
