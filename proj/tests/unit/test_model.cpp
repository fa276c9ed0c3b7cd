#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "seq2rdf/error.hpp"
#include "seq2rdf/numerics/gradcheck.hpp"
#include "seq2rdf/numerics/ops.hpp"
#include "seq2rdf/pipeline.hpp"
#include "seq2rdf/synthetic.hpp"
#include "seq2rdf/text.hpp"
#include "test_util.hpp"
#include "toy.hpp"

using namespace seq2rdf;

namespace {

double sum_exp(const Vec& log_probs) {
  double s = 0.0;
  for (double lp : log_probs) s += std::exp(lp);
  return s;
}

// Gold log-probs by sequential decode_step calls under teacher forcing.
std::array<double, 3> teacher_forced_log_probs(const EncodedExample& ex, const ModelParams& p,
                                               const ModelConfig& cfg, const TripleVocab& v) {
  const auto enc = encode(ex.source, p, cfg);
  DecoderState state = initial_decoder_state(enc, p);
  int prev = TripleVocab::kBos;
  std::array<double, 3> out{};
  for (int step = 1; step <= 3; ++step) {
    const auto s = decode_step(step, prev, state, enc, p, cfg, v);
    out[static_cast<std::size_t>(step - 1)] = s.log_probs[static_cast<std::size_t>(ex.target[step - 1])];
    state = s.state;
    prev = ex.target[static_cast<std::size_t>(step - 1)];
  }
  return out;
}

}  // namespace

TEST_CASE("config flags and labels") {
  ModelConfig cfg;
  cfg.set_flags("none");
  CHECK(cfg.label() == "Seq2Seq");
  cfg.set_flags("A");
  CHECK(cfg.label() == "S+A");
  cfg.set_flags("A,W");
  CHECK(cfg.label() == "S+A+W");
  cfg.set_flags("A+W+G");
  CHECK(cfg.label() == "S+A+W+G");
  CHECK(cfg.flags_string() == "A,W,G");
  CHECK_THROWS_AS(cfg.set_flags("A,X"), Error);
}

TEST_CASE("config keys round-trip") {
  ModelConfig a;
  a.word_dim = 12;
  a.adam.lr = 0.0123;
  a.step_weights = {1.0, 0.5, 2.0};
  a.set_flags("A,G");
  ModelConfig b;
  for (const auto& [k, v] : a.to_key_values()) b.set(k, v);
  CHECK(b.to_key_values() == a.to_key_values());
  CHECK_THROWS_AS(b.set("nope", "1"), Error);
  CHECK_THROWS_AS(b.set("word_dim", "x"), Error);
  ModelConfig bad;
  bad.enc_hidden = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("parameter shapes follow the config") {
  const auto cfg = toy::tiny_config();
  const auto p = ModelParams::zeros(cfg, 20, 10);
  CHECK(p.enc_embed.rows() == 20);
  CHECK(p.enc_embed.cols() == 8);
  CHECK(p.dec_embed.rows() == 10);
  CHECK(p.attn.rows() == 16);
  CHECK(p.attn.cols() == 16);
  CHECK(p.out_w.cols() == 16 + 16);
  CHECK(ModelParams::zeros(toy::tiny_config(false), 20, 10).out_w.cols() == 16);
  CHECK_NOTHROW(check_shapes(p, cfg, 20, 10));
  CHECK_THROWS_AS(check_shapes(p, cfg, 21, 10), Error);
}

TEST_CASE("encoder shapes and zero propagation") {
  const auto cfg = toy::tiny_config();
  SeededRng rng(1);
  const auto p = toy::random_params(cfg, 20, 10, rng);
  const std::vector<int> src{3, 4, 5, 6, 7};
  const auto enc = encode(src, p, cfg);
  CHECK(enc.states.rows() == 5);
  CHECK(enc.states.cols() == 16);
  CHECK(enc.final_state.size() == 16);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(enc.final_state[k] == enc.states(4, k));
    CHECK(enc.final_state[8 + k] == enc.states(0, 8 + k));
  }
  const auto z = encode(src, ModelParams::zeros(cfg, 20, 10), cfg);
  for (double v : z.states.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(encode(std::vector<int>{}, p, cfg), Error);
  CHECK_THROWS_AS(encode(std::vector<int>{25}, p, cfg), Error);
}

TEST_CASE("reversed input swaps the directions when they share weights") {
  const auto cfg = toy::tiny_config();
  SeededRng rng(2);
  auto p = toy::random_params(cfg, 20, 10, rng);
  p.enc_bwd = p.enc_fwd;
  const std::vector<int> x{5, 9, 12};
  std::vector<int> rx(x.rbegin(), x.rend());
  const auto a = encode(x, p, cfg), b = encode(rx, p, cfg);
  const std::size_t T = x.size(), h = cfg.enc_hidden;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < h; ++k) {
      CHECK(b.states(t, k) == doctest::Approx(a.states(T - 1 - t, h + k)).epsilon(1e-14));
      CHECK(b.states(t, h + k) == doctest::Approx(a.states(T - 1 - t, k)).epsilon(1e-14));
    }
  }
}

TEST_CASE("attention") {
  SeededRng rng(3);
  const Tensor2 W = testutil::random_tensor(4, 6, rng);
  const Vec s = testutil::random_vec(4, rng);

  EncoderOutputs one;
  one.states = testutil::random_tensor(1, 6, rng);
  auto a = attend(s, one, W);
  CHECK(a.weights == Vec{1.0});
  for (std::size_t k = 0; k < 6; ++k) CHECK(a.context[k] == one.states(0, k));

  EncoderOutputs same;
  same.states = Tensor2(3, 6);
  const Vec row = testutil::random_vec(6, rng);
  for (std::size_t t = 0; t < 3; ++t) std::copy(row.begin(), row.end(), same.states.row(t).begin());
  a = attend(s, same, W);
  for (double w : a.weights) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-15));
  for (std::size_t k = 0; k < 6; ++k) CHECK(a.context[k] == doctest::Approx(row[k]).epsilon(1e-14));

  // Scalar recomputation: score_t = sum_ij s_i W_ij H_tj.
  EncoderOutputs enc;
  enc.states = testutil::random_tensor(3, 6, rng);
  a = attend(s, enc, W);
  double score[3], mx = -1e300, z = 0.0;
  for (std::size_t t = 0; t < 3; ++t) {
    score[t] = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 6; ++j) score[t] += s[i] * W(i, j) * enc.states(t, j);
    mx = std::max(mx, score[t]);
  }
  double w[3];
  for (std::size_t t = 0; t < 3; ++t) z += (w[t] = std::exp(score[t] - mx));
  for (std::size_t t = 0; t < 3; ++t) w[t] /= z;
  for (std::size_t t = 0; t < 3; ++t) CHECK(std::abs(a.weights[t] - w[t]) < 1e-12);
  for (std::size_t k = 0; k < 6; ++k) {
    double c = 0.0;
    for (std::size_t t = 0; t < 3; ++t) c += w[t] * enc.states(t, k);
    CHECK(std::abs(a.context[k] - c) < 1e-12);
  }
}

TEST_CASE("decode step masks and normalizes") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets();
  SeededRng rng(4);
  const auto p = toy::random_params(cfg, 20, vocab.size(), rng);
  const std::vector<int> src{3, 8, 9, 10};
  const auto enc = encode(src, p, cfg);
  DecoderState state = initial_decoder_state(enc, p);
  int prev = TripleVocab::kBos;
  for (int step = 1; step <= 3; ++step) {
    const auto out = decode_step(step, prev, state, enc, p, cfg, vocab);
    const auto mask = vocab.mask(step);
    for (int id = 0; id < static_cast<int>(vocab.size()); ++id) {
      const bool inside = id >= mask.begin && id < mask.end;
      if (!inside) CHECK(std::exp(out.log_probs[static_cast<std::size_t>(id)]) == 0.0);
    }
    CHECK(std::abs(sum_exp(out.log_probs) - 1.0) < 1e-9);
    REQUIRE(out.attention.size() == src.size());
    double aw = 0.0;
    for (double w : out.attention) aw += w;
    CHECK(std::abs(aw - 1.0) < 1e-9);
    state = out.state;
    prev = mask.begin;
  }
  CHECK_THROWS_AS(decode_step(0, TripleVocab::kBos, state, enc, p, cfg, vocab), Error);
  CHECK_THROWS_AS(decode_step(4, 1, state, enc, p, cfg, vocab), Error);
  CHECK_THROWS_AS(decode_step(1, 1, state, enc, p, cfg, vocab), Error);
}

TEST_CASE("zero parameters give uniform step distributions") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets(6, 3);
  const auto p = ModelParams::zeros(cfg, 20, vocab.size());
  const std::vector<int> src{3, 4};
  const auto enc = encode(src, p, cfg);
  const auto out1 = decode_step(1, TripleVocab::kBos, initial_decoder_state(enc, p), enc, p, cfg, vocab);
  for (int id = 1; id <= 6; ++id) CHECK(out1.log_probs[static_cast<std::size_t>(id)] == doctest::Approx(-std::log(6.0)));
  const auto out2 = decode_step(2, 1, out1.state, enc, p, cfg, vocab);
  for (int id = 7; id <= 9; ++id) CHECK(out2.log_probs[static_cast<std::size_t>(id)] == doctest::Approx(-std::log(3.0)));

  const EncodedExample ex{src, {2, 8, 5}};
  CHECK(std::abs(forward_loss(ex, p, cfg, vocab).loss - (2 * std::log(6.0) + std::log(3.0))) < 1e-9);
}

TEST_CASE("certain model has zero loss") {
  auto cfg = toy::tiny_config();
  const auto vocab = toy::targets(6, 3);
  auto p = ModelParams::zeros(cfg, 20, vocab.size());
  // Subject and object share the entity logits, so use a gold with s == o.
  p.out_b(0, 2) = 1000.0;
  p.out_b(0, 8) = 1000.0;
  const EncodedExample ex{{3, 4, 5}, {2, 8, 2}};
  CHECK(std::abs(forward_loss(ex, p, cfg, vocab).loss) < 1e-11);
}

TEST_CASE("forward loss equals the teacher-forced step log-probs") {
  const auto vocab = toy::targets();
  SeededRng rng(6);
  for (bool attention : {true, false}) {
    auto cfg = toy::tiny_config(attention);
    for (int trial = 0; trial < 30; ++trial) {
      const auto p = toy::random_params(cfg, 20, vocab.size(), rng);
      const auto ex = toy::random_example(vocab, 20, 1 + rng.index(6), rng);
      const auto lp = teacher_forced_log_probs(ex, p, cfg, vocab);
      CHECK(std::abs(forward_loss(ex, p, cfg, vocab).loss + (lp[0] + lp[1] + lp[2])) < 1e-9);
      CHECK(example_loss(ex, p, cfg, vocab) == forward_loss(ex, p, cfg, vocab).loss);
    }
  }
}

TEST_CASE("step weights scale each term") {
  auto cfg = toy::tiny_config();
  const auto vocab = toy::targets();
  SeededRng rng(7);
  const auto p = toy::random_params(cfg, 20, vocab.size(), rng);
  const auto ex = toy::random_example(vocab, 20, 4, rng);
  const auto lp = teacher_forced_log_probs(ex, p, cfg, vocab);
  cfg.step_weights = {2.0, 0.0, 0.5};
  CHECK(std::abs(forward_loss(ex, p, cfg, vocab).loss + (2.0 * lp[0] + 0.5 * lp[2])) < 1e-9);
}

TEST_CASE("forward loss rejects golds outside the masks") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets();
  SeededRng rng(8);
  const auto p = toy::random_params(cfg, 20, vocab.size(), rng);
  CHECK_THROWS_AS(forward_loss({{3, 4}, {7, 7, 1}}, p, cfg, vocab), Error);
  CHECK_THROWS_AS(forward_loss({{3, 4}, {1, 2, 1}}, p, cfg, vocab), Error);
}

TEST_CASE("full model gradients match finite differences") {
  const auto vocab = toy::targets(6, 3);
  for (bool attention : {true, false}) {
    auto cfg = toy::tiny_config(attention);
    cfg.step_weights = {1.0, 0.7, 1.3};
    SeededRng rng(attention ? 9 : 10);
    auto p = toy::random_params(cfg, 20, vocab.size(), rng);
    const auto ex = toy::random_example(vocab, 20, 5, rng);
    auto analytic = forward_loss(ex, p, cfg, vocab).grads;
    const auto named = p.tensors();
    const auto grads = analytic.tensor_ptrs();
    const std::vector<const Tensor2*> cgrads(grads.begin(), grads.end());
    const auto report = grad_check_fd([&] { return example_loss(ex, p, cfg, vocab); }, named,
                                      cgrads, 1e-4);
    INFO("worst tensor " << report.worst_tensor << " index " << report.worst_index);
    CHECK(report.max_rel_error < 1e-3);
    CHECK(report.coordinates > 1000);
  }
}

TEST_CASE("attention off: decoding ignores encoder states beyond the final state") {
  const auto cfg = toy::tiny_config(false);
  const auto vocab = toy::targets();
  SeededRng rng(11);
  const auto p = toy::random_params(cfg, 20, vocab.size(), rng);
  const std::vector<int> src{3, 4, 5, 6};
  const auto enc = encode(src, p, cfg);
  EncoderOutputs scrambled = enc;
  for (double& v : scrambled.states.values()) v = rng.uniform(-5, 5);
  const auto a = decode_greedy(src, p, cfg, vocab);
  CHECK(a.attention.empty());
  DecoderState sa = initial_decoder_state(enc, p), sb = initial_decoder_state(scrambled, p);
  int prev = TripleVocab::kBos;
  for (int step = 1; step <= 3; ++step) {
    const auto x = decode_step(step, prev, sa, enc, p, cfg, vocab);
    const auto y = decode_step(step, prev, sb, scrambled, p, cfg, vocab);
    CHECK(x.log_probs == y.log_probs);
    CHECK(x.attention.empty());
    sa = x.state;
    sb = y.state;
    prev = a.ids[static_cast<std::size_t>(step - 1)];
  }
}

TEST_CASE("greedy decoding") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets();
  SeededRng rng(12);
  const auto p = toy::random_params(cfg, 20, vocab.size(), rng);
  const std::vector<int> src{3, 4, 5, 6, 7};
  const auto g = decode_greedy(src, p, cfg, vocab);
  CHECK(vocab.is_entity(g.ids[0]));
  CHECK(vocab.is_predicate(g.ids[1]));
  CHECK(vocab.is_entity(g.ids[2]));
  CHECK(g.total_log_prob == (g.step_log_probs[0] + g.step_log_probs[1]) + g.step_log_probs[2]);
  REQUIRE(g.attention.size() == 3);
  for (const auto& row : g.attention) {
    double s = 0.0;
    for (double w : row) s += w;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
  const auto b1 = decode_beam(src, p, cfg, vocab, 1);
  REQUIRE(b1.size() == 1);
  CHECK(b1[0].ids == g.ids);
  CHECK(b1[0].total_log_prob == g.total_log_prob);
  CHECK_THROWS_AS(decode_beam(src, p, cfg, vocab, 0), Error);
}

TEST_CASE("greedy ties go to the lowest id") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets();
  const auto p = ModelParams::zeros(cfg, 20, vocab.size());
  const auto g = decode_greedy(std::vector<int>{3}, p, cfg, vocab);
  CHECK(g.ids == TripleIds{1, 7, 1});
}

TEST_CASE("beam search agrees with exhaustive enumeration") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets(6, 3);
  SeededRng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = toy::random_params(cfg, 20, vocab.size(), rng, 1.0);
    const auto ex = toy::random_example(vocab, 20, 5, rng);
    double best = -std::numeric_limits<double>::infinity();
    TripleIds best_ids{};
    for (int s = 1; s <= 6; ++s)
      for (int r = 7; r <= 9; ++r)
        for (int o = 1; o <= 6; ++o) {
          const EncodedExample cand{ex.source, {s, r, o}};
          const double lp = -forward_loss(cand, p, cfg, vocab).loss;
          if (lp > best) {
            best = lp;
            best_ids = {s, r, o};
          }
        }
    const auto beam = decode_beam(ex.source, p, cfg, vocab, 108);
    CHECK(beam.size() == 108);
    CHECK(beam[0].ids == best_ids);
    CHECK(std::abs(beam[0].total_log_prob - best) < 1e-9);
    for (std::size_t i = 1; i < beam.size(); ++i) CHECK(beam[i - 1].total_log_prob >= beam[i].total_log_prob);
  }
}

TEST_CASE("random decodes never violate the partition") {
  const auto cfg = toy::tiny_config();
  const auto vocab = toy::targets();
  SeededRng rng(14);
  int violations = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = toy::random_params(cfg, 20, vocab.size(), rng, 2.0);
    const auto ex = toy::random_example(vocab, 20, 1 + rng.index(8), rng);
    const auto g = decode_greedy(ex.source, p, cfg, vocab);
    violations += !(vocab.is_entity(g.ids[0]) && vocab.is_predicate(g.ids[1]) && vocab.is_entity(g.ids[2]));
  }
  CHECK(violations == 0);
}

TEST_CASE("single example memorization") {
  auto cfg = toy::tiny_config();
  cfg.epochs = 500;
  cfg.patience = 0;
  cfg.batch_size = 1;
  const auto ex = capital_example();
  const std::vector<AnnotatedExample> train{ex};
  const std::vector<Triple> kg{ex.gold, {"dbr:France", "dbo:capital", "dbr:Paris"},
                               {"dbr:Paris", "dbo:country", "dbr:France"}};
  PipelineInputs in;
  in.train = train;
  in.kg = kg;
  const auto r = train_pipeline(in, cfg);
  CHECK(r.training.log.back().train_loss < 0.01);
  const auto g = translate_greedy(tokenize("berlin is the capital city of germany"), r.model);
  CHECK(decode_triple(g.ids, r.model.targets) == ex.gold);
}

TEST_CASE("training is deterministic and flag-aware") {
  MemorizationOptions mo;
  mo.sentences = 16;
  mo.word_dim = 8;
  const auto corpus = make_memorization_corpus(mo);
  auto cfg = toy::tiny_config();
  cfg.set_flags("A,W,G");
  cfg.epochs = 3;
  cfg.batch_size = 4;
  TransEConfig tc;
  tc.dim = 8;
  tc.epochs = 5;
  const auto emb = transe_train(corpus.kg, tc).embeddings;
  PipelineInputs in;
  in.train = corpus.dataset.train;
  in.kg = corpus.kg;
  in.word_vectors = &corpus.word_vectors;
  in.kg_embeddings = &emb;
  std::vector<std::string> log_a, log_b;
  const auto a = train_pipeline(in, cfg, [&](const EpochRecord& e) { log_a.push_back(format_epoch_record(e)); });
  const auto b = train_pipeline(in, cfg, [&](const EpochRecord& e) { log_b.push_back(format_epoch_record(e)); });
  CHECK(a.model.params == b.model.params);
  CHECK(a.model.config.to_key_values() == b.model.config.to_key_values());
  CHECK(log_a == log_b);
  CHECK(a.word_coverage == 1.0);
  CHECK(a.kg_coverage == 1.0);

  auto other = cfg;
  other.seed = 2;
  CHECK_FALSE(train_pipeline(in, other).model.params == a.model.params);

  PipelineInputs missing = in;
  missing.kg_embeddings = nullptr;
  CHECK_THROWS_AS(train_pipeline(missing, cfg), Error);
}

TEST_CASE("W and G copy the pre-trained rows into the initial tables") {
  MemorizationOptions mo;
  mo.sentences = 10;
  mo.word_dim = 8;
  const auto corpus = make_memorization_corpus(mo);
  auto cfg = toy::tiny_config();
  cfg.set_flags("A,W,G");
  const WordVocab words = training_word_vocab(corpus.dataset.train, cfg, &corpus.word_vectors);
  const TripleVocab targets = training_triple_vocab(corpus.dataset.train, corpus.kg);
  TransEConfig tc;
  tc.dim = 8;
  tc.epochs = 2;
  const auto emb = transe_train(corpus.kg, tc).embeddings;
  SeededRng rng(1);
  const auto wt = word_table_from_vectors(corpus.word_vectors, words, 8, rng);
  const auto kt = decoder_table_from_kg(emb, targets, 8, rng);
  TrainInputs ti;
  ti.train = corpus.dataset.train;
  ti.words = &words;
  ti.targets = &targets;
  ti.word_table = &wt.table;
  ti.kg_table = &kt.table;
  const auto p = initial_params(ti, cfg);
  for (std::size_t r = 0; r < corpus.word_vectors.tokens.size(); ++r) {
    const auto id = static_cast<std::size_t>(*words.find(corpus.word_vectors.tokens[r]));
    for (std::size_t k = 0; k < 8; ++k) CHECK(p.enc_embed(id, k) == corpus.word_vectors.vectors(r, k));
  }
  for (const auto& e : targets.entities()) {
    const auto id = static_cast<std::size_t>(*targets.find_entity(e));
    for (std::size_t k = 0; k < 8; ++k) CHECK(p.dec_embed(id, k) == emb.entity_table(*emb.entity_row(e), k));
  }
  cfg.set_flags("A");
  ti.word_table = ti.kg_table = nullptr;
  CHECK_NOTHROW(initial_params(ti, cfg));
  cfg.set_flags("A,W");
  CHECK_THROWS_AS(initial_params(ti, cfg), Error);
}

TEST_CASE("translation metadata") {
  Model m;
  m.config = toy::tiny_config();
  m.config.max_source_len = 4;
  m.words = toy::words();
  m.targets = toy::targets();
  SeededRng rng(15);
  m.params = toy::random_params(m.config, m.words.size(), m.targets.size(), rng);
  const std::vector<std::string> tokens{"w1", "zzz", "w2", "qqq", "w3", "w4"};
  const auto r = translate_greedy(tokens, m);
  CHECK(r.truncated);
  CHECK(r.source_tokens == 4);
  CHECK(r.unknown_tokens == 2);
  CHECK(r.attention.at(0).size() == 4);
  CHECK_THROWS_AS(translate_greedy(std::vector<std::string>{}, m), Error);
  const auto beam = translate_beam(tokens, m, 5);
  CHECK(beam.size() == 5);
  CHECK(beam[0].unknown_tokens == 2);
}

TEST_CASE("encode_example drops out-of-vocabulary golds") {
  const auto words = toy::words();
  const auto targets = toy::targets();
  AnnotatedExample ok{{"w1", "w2"}, {"ent:E0", "rel:p1", "ent:E2"}, "a"};
  AnnotatedExample oov{{"w1"}, {"ent:E0", "rel:nope", "ent:E2"}, "b"};
  CHECK(encode_example(ok, words, targets, 8).has_value());
  CHECK_FALSE(encode_example(oov, words, targets, 8).has_value());
}
