#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "seq2rdf/error.hpp"
#include "seq2rdf/numerics/adam.hpp"
#include "seq2rdf/numerics/gradcheck.hpp"
#include "seq2rdf/numerics/lstm.hpp"
#include "seq2rdf/numerics/ops.hpp"
#include "seq2rdf/numerics/rng.hpp"
#include "test_util.hpp"

using namespace seq2rdf;
using testutil::random_tensor;
using testutil::random_vec;

namespace {

Tensor2 triple_loop(const Tensor2& a, const Tensor2& b) {
  Tensor2 c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("matmul small cases") {
  const Tensor2 m(2, 2, {1, 2, 3, 4});
  CHECK(matmul(Tensor2::identity(2), m) == m);
  SeededRng rng(3);
  const Tensor2 z = matmul(Tensor2(2, 3), random_tensor(3, 4, rng));
  CHECK(z == Tensor2(2, 4));
  CHECK(matmul(m, Tensor2(2, 2, {5, 6, 7, 8})) == Tensor2(2, 2, {19, 22, 43, 50}));
}

TEST_CASE("matmul equals the triple loop bit for bit") {
  SeededRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 1 + rng.index(16), k = 1 + rng.index(16), m = 1 + rng.index(16);
    const Tensor2 a = random_tensor(n, k, rng), b = random_tensor(k, m, rng);
    CHECK(matmul(a, b) == triple_loop(a, b));
  }
}

TEST_CASE("matmul rejects mismatched shapes and names both") {
  try {
    matmul(Tensor2(2, 3), Tensor2(4, 5));
    FAIL("expected rejection");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x5") != std::string::npos);
  }
}

TEST_CASE("softmax rows") {
  const Tensor2 p = softmax_rows(Tensor2(3, 3, {0, 0, 0, 1, 2, 3, 1000, 0, 0}));
  for (std::size_t c = 0; c < 3; ++c) CHECK(p(0, c) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  // exp(k) / (e + e^2 + e^3)
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(p(1, 0) == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
  CHECK(p(1, 1) == doctest::Approx(std::exp(2.0) / z).epsilon(1e-14));
  CHECK(p(1, 2) == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));
  CHECK(std::abs(p(1, 0) - 0.09003) < 5e-6);
  CHECK(std::abs(p(1, 1) - 0.24473) < 5e-6);
  CHECK(std::abs(p(1, 2) - 0.66524) < 5e-6);
  CHECK(p(2, 0) == 1.0);
  CHECK(p(2, 1) == 0.0);
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  SeededRng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor2 logits = random_tensor(1, 1 + rng.index(20), rng, trial % 2 ? 1e4 : 5.0);
    Tensor2 shifted = logits;
    for (double& v : shifted.values()) v += 3.25;
    const Tensor2 p = softmax_rows(logits), q = softmax_rows(shifted);
    double sum = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) {
      CHECK(p(0, c) >= 0.0);
      sum += p(0, c);
      CHECK(std::abs(p(0, c) - q(0, c)) < 1e-12);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax rejects non-finite logits") {
  CHECK_THROWS_AS(softmax_rows(Tensor2(1, 2, {0.0, std::numeric_limits<double>::quiet_NaN()})),
                  Error);
}

TEST_CASE("weighted cross-entropy") {
  const std::vector<double> onehot{0, 1, 0};
  CHECK(weighted_cross_entropy(onehot, 1, 1.0).loss == doctest::Approx(0.0).epsilon(1e-11));
  const std::vector<double> uniform(4, 0.25);
  CHECK(weighted_cross_entropy(uniform, 2, 1.0).loss == doctest::Approx(1.386294).epsilon(1e-6));
  const auto zero = weighted_cross_entropy(uniform, 2, 0.0);
  CHECK(zero.loss == 0.0);
  for (double g : zero.grad) CHECK(g == 0.0);
  CHECK_THROWS_AS(weighted_cross_entropy(uniform, 4, 1.0), Error);
}

TEST_CASE("weighted cross-entropy is linear in the weight") {
  SeededRng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Vec p = random_vec(6, rng, 3.0);
    softmax_inplace(p);
    const double w1 = rng.uniform(0, 2), w2 = rng.uniform(0, 2);
    const auto t = rng.index(6);
    const auto a = weighted_cross_entropy(p, t, w1), b = weighted_cross_entropy(p, t, w2),
               ab = weighted_cross_entropy(p, t, w1 + w2);
    CHECK(std::abs(ab.loss - (a.loss + b.loss)) < 1e-12);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(ab.grad[i] - (a.grad[i] + b.grad[i])) < 1e-12);
  }
}

TEST_CASE("cross-entropy gradient matches softmax composition") {
  // d/dz of -w ln softmax(z)_t, by central differences on the logits.
  SeededRng rng(21);
  const Vec z = random_vec(5, rng, 2.0);
  const double w = 0.7;
  const std::size_t t = 3;
  auto loss_at = [&](const Vec& logits) {
    Vec p = logits;
    softmax_inplace(p);
    return weighted_cross_entropy(p, t, w).loss;
  };
  Vec p = z;
  softmax_inplace(p);
  const auto analytic = weighted_cross_entropy(p, t, w).grad;
  for (std::size_t i = 0; i < z.size(); ++i) {
    Vec up = z, dn = z;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    CHECK(analytic[i] == doctest::Approx((loss_at(up) - loss_at(dn)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("lstm cell with zero weights") {
  const LstmWeights w = LstmWeights::zeros(3, 4);
  const Vec x{0.3, -1.0, 2.0}, h(4, 0.0);
  auto step = lstm_cell(x, h, Vec(4, 0.0), w);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(step.h[k] == 0.0);
    CHECK(step.c[k] == 0.0);
  }
  const Vec v{1.0, -2.0, 0.5, 4.0};
  step = lstm_cell(x, h, v, w);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(step.c[k] == doctest::Approx(0.5 * v[k]).epsilon(1e-15));
    CHECK(step.h[k] == doctest::Approx(0.5 * std::tanh(0.5 * v[k])).epsilon(1e-15));
  }
}

TEST_CASE("lstm random init has unit forget bias") {
  SeededRng rng(1);
  const auto w = LstmWeights::random(3, 5, rng);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(w.gate_bias(Gate::kForget)(0, k) == 1.0);
    CHECK(w.gate_bias(Gate::kInput)(0, k) == 0.0);
  }
  for (std::size_t g = 0; g < 4; ++g) {
    CHECK(w.w[g].rows() == 5);
    CHECK(w.w[g].cols() == 8);
    for (double v : w.w[g].values()) CHECK(std::abs(v) <= 0.08);
  }
}

TEST_CASE("lstm cell rejects dimension mismatch") {
  const LstmWeights w = LstmWeights::zeros(3, 4);
  CHECK_THROWS_AS(lstm_cell(Vec(2), Vec(4), Vec(4), w), Error);
  CHECK_THROWS_AS(lstm_cell(Vec(3), Vec(5), Vec(4), w), Error);
}

namespace {

// Loss r_h . h + r_c . c, differentiated by hand-rolled central differences.
void check_lstm_backward(std::size_t in, std::size_t hid, std::uint64_t seed) {
  SeededRng rng(seed);
  LstmWeights w = LstmWeights::random(in, hid, rng, 0.5);
  for (auto& b : w.bias) for (double& v : b.values()) v = rng.uniform(-0.5, 0.5);
  Vec x = random_vec(in, rng), h = random_vec(hid, rng), c = random_vec(hid, rng);
  const Vec rh = random_vec(hid, rng), rc = random_vec(hid, rng);
  auto loss = [&] {
    const auto s = lstm_cell(x, h, c, w);
    double l = 0.0;
    for (std::size_t k = 0; k < hid; ++k) l += rh[k] * s.h[k] + rc[k] * s.c[k];
    return l;
  };
  const auto step = lstm_cell(x, h, c, w);
  LstmWeights grads = LstmWeights::zeros(in, hid);
  const auto in_grads = lstm_cell_backward(rh, rc, step.cache, w, grads);

  const double eps = 1e-5;
  double worst = 0.0;
  auto probe = [&](double& coord, double analytic) {
    const double saved = coord;
    coord = saved + eps;
    const double up = loss();
    coord = saved - eps;
    const double dn = loss();
    coord = saved;
    const double numeric = (up - dn) / (2 * eps);
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
  };
  for (std::size_t k = 0; k < in; ++k) probe(x[k], in_grads.dx[k]);
  for (std::size_t k = 0; k < hid; ++k) probe(h[k], in_grads.dh_prev[k]);
  for (std::size_t k = 0; k < hid; ++k) probe(c[k], in_grads.dc_prev[k]);
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t i = 0; i < w.w[g].size(); ++i) probe(w.w[g].values()[i], grads.w[g].values()[i]);
    for (std::size_t i = 0; i < hid; ++i) probe(w.bias[g].values()[i], grads.bias[g].values()[i]);
  }
  CHECK(worst < 1e-6);
}

}  // namespace

TEST_CASE("lstm backward matches finite differences") {
  check_lstm_backward(4, 4, 7);
  check_lstm_backward(8, 8, 8);
  check_lstm_backward(3, 5, 9);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  SeededRng rng(2);
  Tensor2 p = random_tensor(3, 3, rng);
  const Tensor2 before = p, g(3, 3);
  std::vector<Tensor2*> ps{&p};
  std::vector<const Tensor2*> gs{&g};
  AdamState state(AdamConfig{}, std::vector<const Tensor2*>{&p});
  adam_step(ps, gs, state);
  CHECK(p == before);
  CHECK(state.step() == 1);
}

TEST_CASE("adam: first step moves by about -lr") {
  for (double g : {0.3, 5.0, 1e-3}) {
    Tensor2 p(1, 1, 2.0);
    const Tensor2 grad(1, 1, g);
    std::vector<Tensor2*> ps{&p};
    std::vector<const Tensor2*> gs{&grad};
    AdamConfig cfg;
    AdamState state(cfg, std::vector<const Tensor2*>{&p});
    adam_step(ps, gs, state);
    // m_hat = g, v_hat = g^2, step = lr g / (|g| + eps)
    const double expected = 2.0 - cfg.lr * g / (std::abs(g) + cfg.epsilon);
    CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(std::abs((p(0, 0) - 2.0) + cfg.lr) < 1e-7);
  }
}

TEST_CASE("adam: identical state gives identical results") {
  SeededRng rng(4);
  Tensor2 a = random_tensor(4, 7, rng), g = random_tensor(4, 7, rng);
  Tensor2 b = a;
  AdamState sa(AdamConfig{}, std::vector<const Tensor2*>{&a});
  AdamState sb = sa;
  std::vector<Tensor2*> pa{&a}, pb{&b};
  std::vector<const Tensor2*> gs{&g};
  for (int i = 0; i < 5; ++i) {
    adam_step(pa, gs, sa);
    adam_step(pb, gs, sb);
  }
  CHECK(a == b);
  CHECK(sa == sb);
  CHECK(sa.step() == 5);
}

TEST_CASE("adam rejects shape mismatch") {
  Tensor2 p(2, 2), g(2, 3);
  std::vector<Tensor2*> ps{&p};
  std::vector<const Tensor2*> gs{&g};
  AdamState state(AdamConfig{}, std::vector<const Tensor2*>{&p});
  CHECK_THROWS_AS(adam_step(ps, gs, state), Error);
}

TEST_CASE("global norm clipping") {
  Tensor2 a(1, 2, {6.0, 0.0}), b(1, 1, {8.0});
  std::vector<Tensor2*> ts{&a, &b};
  CHECK(clip_global_norm(ts, 5.0) == doctest::Approx(10.0));
  CHECK(a(0, 0) == 3.0);
  CHECK(b(0, 0) == 4.0);

  Tensor2 c(1, 2, {1.8, 2.4});  // norm 3
  const Tensor2 c0 = c;
  std::vector<Tensor2*> tc{&c};
  clip_global_norm(tc, 5.0);
  CHECK(c == c0);

  Tensor2 z(2, 2);
  std::vector<Tensor2*> tz{&z};
  clip_global_norm(tz, 5.0);
  CHECK(z == Tensor2(2, 2));
  CHECK_THROWS_AS(clip_global_norm(tz, 0.0), Error);
}

TEST_CASE("gradient checker") {
  const std::vector<double> w{3.0};
  auto sq = [](std::span<const double> p) { return p[0] * p[0]; };
  CHECK(grad_check_fd(sq, w, std::vector<double>{6.0}, 1e-4).max_rel_error < 1e-8);
  // Doubling the analytic gradient: |12 - 6| / 12.
  CHECK(grad_check_fd(sq, w, std::vector<double>{12.0}, 1e-4).max_rel_error ==
        doctest::Approx(0.5).epsilon(1e-6));
  auto bad = [](std::span<const double>) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(grad_check_fd(bad, w, std::vector<double>{0.0}, 1e-4), Error);
}

TEST_CASE("gradient checker over tensors restores values") {
  Tensor2 t(1, 3, {1.0, -2.0, 0.5});
  const Tensor2 before = t;
  Tensor2 g(1, 3);
  for (std::size_t i = 0; i < 3; ++i) g.values()[i] = 3 * t.values()[i] * t.values()[i];
  std::vector<NamedTensor> named{{"t", &t}};
  std::vector<const Tensor2*> grads{&g};
  auto loss = [&] {
    double s = 0.0;
    for (double v : t.values()) s += v * v * v;
    return s;
  };
  const auto report = grad_check_fd(loss, named, grads, 1e-5);
  CHECK(report.max_rel_error < 1e-8);
  CHECK(report.coordinates == 3);
  CHECK(t == before);
}

TEST_CASE("seeded rng is reproducible") {
  SeededRng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  // std::mt19937_64 reference value for seed 5489.
  SeededRng d(5489);
  CHECK(d.next_u64() == 14514284786278117030ULL);
  SeededRng e(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = e.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(e.index(7) < 7);
  }
  CHECK(SeededRng(9).derive(1).next_u64() == SeededRng(9).derive(1).next_u64());
  CHECK(SeededRng(9).derive(1).next_u64() != SeededRng(9).derive(2).next_u64());
}

TEST_CASE("shuffle is a permutation") {
  SeededRng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}
