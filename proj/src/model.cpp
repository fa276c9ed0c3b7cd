#include "seq2rdf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seq2rdf/error.hpp"
#include "seq2rdf/log.hpp"
#include "seq2rdf/numerics/ops.hpp"
#include "seq2rdf/text.hpp"

namespace seq2rdf {

// ---------------------------------------------------------------------------
// Configuration

void ModelConfig::validate() const {
  for (auto [name, v] : {std::pair{"word_dim", word_dim}, std::pair{"kg_dim", kg_dim},
                         std::pair{"enc_hidden", enc_hidden}, std::pair{"dec_hidden", dec_hidden},
                         std::pair{"max_source_len", max_source_len},
                         std::pair{"min_count", min_count}, std::pair{"batch_size", batch_size}}) {
    if (v < 1) throw Error(std::string(name) + " must be at least 1");
  }
  if (!(adam.lr > 0.0)) throw Error("lr must be positive");
  if (!(clip_norm > 0.0)) throw Error("clip_norm must be positive");
  if (!(init_scale > 0.0)) throw Error("init_scale must be positive");
  for (double w : step_weights) {
    if (!(w >= 0.0)) throw Error("step weights must be non-negative");
  }
}

void ModelConfig::set_flags(std::string_view flags) {
  use_attention = use_word_init = use_kg_init = false;
  const auto lower = to_lower_ascii(trim(flags));
  if (lower.empty() || lower == "none" || lower == "seq2seq") return;
  for (auto part : split(lower, lower.find('+') != std::string::npos ? '+' : ',')) {
    const auto f = std::string(trim(part));
    if (f == "a") {
      use_attention = true;
    } else if (f == "w") {
      use_word_init = true;
    } else if (f == "g") {
      use_kg_init = true;
    } else if (f == "s" || f.empty()) {
      continue;
    } else {
      throw Error("unknown model flag '" + f + "' (expected A, W, G)");
    }
  }
}

std::string ModelConfig::flags_string() const {
  std::vector<std::string> parts;
  if (use_attention) parts.emplace_back("A");
  if (use_word_init) parts.emplace_back("W");
  if (use_kg_init) parts.emplace_back("G");
  return parts.empty() ? "none" : join(parts, ",");
}

std::string ModelConfig::label() const {
  if (!use_attention && !use_word_init && !use_kg_init) return "Seq2Seq";
  std::string out = "S";
  if (use_attention) out += "+A";
  if (use_word_init) out += "+W";
  if (use_kg_init) out += "+G";
  return out;
}

void ModelConfig::set(const std::string& key, const std::string& value) {
  auto size = [&] { return static_cast<std::size_t>(parse_uint(key, value)); };
  if (key == "word_dim") {
    word_dim = size();
  } else if (key == "kg_dim") {
    kg_dim = size();
  } else if (key == "enc_hidden") {
    enc_hidden = size();
  } else if (key == "dec_hidden") {
    dec_hidden = size();
  } else if (key == "attention") {
    use_attention = parse_bool(key, value);
  } else if (key == "word_init") {
    use_word_init = parse_bool(key, value);
  } else if (key == "kg_init") {
    use_kg_init = parse_bool(key, value);
  } else if (key == "flags") {
    set_flags(value);
  } else if (key == "max_source_len") {
    max_source_len = size();
  } else if (key == "min_count") {
    min_count = size();
  } else if (key == "seed") {
    seed = parse_uint(key, value);
  } else if (key == "lr") {
    adam.lr = parse_double(key, value);
  } else if (key == "beta1") {
    adam.beta1 = parse_double(key, value);
  } else if (key == "beta2") {
    adam.beta2 = parse_double(key, value);
  } else if (key == "adam_epsilon") {
    adam.epsilon = parse_double(key, value);
  } else if (key == "clip_norm") {
    clip_norm = parse_double(key, value);
  } else if (key == "init_scale") {
    init_scale = parse_double(key, value);
  } else if (key == "epochs") {
    epochs = size();
  } else if (key == "batch_size") {
    batch_size = size();
  } else if (key == "patience") {
    patience = size();
  } else if (key == "step_weights") {
    auto parts = split(value, ',');
    if (parts.size() != 3) throw Error("step_weights needs 3 comma-separated values");
    for (std::size_t i = 0; i < 3; ++i) step_weights[i] = parse_double(key, trim(parts[i]));
  } else {
    throw Error("unknown model config key '" + key + "'");
  }
}

KeyValues ModelConfig::to_key_values() const {
  auto u = [](std::size_t v) { return std::to_string(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {{"word_dim", u(word_dim)},
          {"kg_dim", u(kg_dim)},
          {"enc_hidden", u(enc_hidden)},
          {"dec_hidden", u(dec_hidden)},
          {"attention", b(use_attention)},
          {"word_init", b(use_word_init)},
          {"kg_init", b(use_kg_init)},
          {"max_source_len", u(max_source_len)},
          {"min_count", u(min_count)},
          {"seed", std::to_string(seed)},
          {"lr", format_double(adam.lr)},
          {"beta1", format_double(adam.beta1)},
          {"beta2", format_double(adam.beta2)},
          {"adam_epsilon", format_double(adam.epsilon)},
          {"clip_norm", format_double(clip_norm)},
          {"init_scale", format_double(init_scale)},
          {"epochs", u(epochs)},
          {"batch_size", u(batch_size)},
          {"patience", u(patience)},
          {"step_weights", format_double(step_weights[0]) + "," + format_double(step_weights[1]) +
                               "," + format_double(step_weights[2])}};
}

// ---------------------------------------------------------------------------
// Parameters

ModelParams ModelParams::zeros(const ModelConfig& config, std::size_t n_words,
                               std::size_t n_targets) {
  config.validate();
  const std::size_t two_h = 2 * config.enc_hidden;
  ModelParams p;
  p.enc_embed = Tensor2(n_words, config.word_dim);
  p.enc_fwd = LstmWeights::zeros(config.word_dim, config.enc_hidden);
  p.enc_bwd = LstmWeights::zeros(config.word_dim, config.enc_hidden);
  p.dec_embed = Tensor2(n_targets, config.kg_dim);
  p.dec = LstmWeights::zeros(config.kg_dim, config.dec_hidden);
  p.attn = Tensor2(config.dec_hidden, two_h);
  p.bridge_w = Tensor2(config.dec_hidden, two_h);
  p.bridge_b = Tensor2(1, config.dec_hidden);
  p.out_w = Tensor2(n_targets, config.feature_dim());
  p.out_b = Tensor2(1, n_targets);
  return p;
}

ModelParams ModelParams::random(const ModelConfig& config, std::size_t n_words,
                                std::size_t n_targets, SeededRng& rng) {
  ModelParams p = zeros(config, n_words, n_targets);
  const double s = config.init_scale;
  auto fill = [&](Tensor2& t) {
    for (double& v : t.values()) v = rng.uniform(-s, s);
  };
  fill(p.enc_embed);
  p.enc_fwd = LstmWeights::random(config.word_dim, config.enc_hidden, rng, s);
  p.enc_bwd = LstmWeights::random(config.word_dim, config.enc_hidden, rng, s);
  fill(p.dec_embed);
  p.dec = LstmWeights::random(config.kg_dim, config.dec_hidden, rng, s);
  fill(p.attn);
  fill(p.bridge_w);
  fill(p.out_w);
  return p;
}

std::vector<NamedTensor> ModelParams::tensors() {
  std::vector<NamedTensor> out;
  out.push_back({"enc_embed", &enc_embed});
  enc_fwd.append_tensors("enc_fwd", out);
  enc_bwd.append_tensors("enc_bwd", out);
  out.push_back({"dec_embed", &dec_embed});
  dec.append_tensors("dec", out);
  out.push_back({"attn", &attn});
  out.push_back({"bridge_w", &bridge_w});
  out.push_back({"bridge_b", &bridge_b});
  out.push_back({"out_w", &out_w});
  out.push_back({"out_b", &out_b});
  return out;
}

std::vector<ConstNamedTensor> ModelParams::tensors() const {
  std::vector<ConstNamedTensor> out;
  out.push_back({"enc_embed", &enc_embed});
  enc_fwd.append_tensors("enc_fwd", out);
  enc_bwd.append_tensors("enc_bwd", out);
  out.push_back({"dec_embed", &dec_embed});
  dec.append_tensors("dec", out);
  out.push_back({"attn", &attn});
  out.push_back({"bridge_w", &bridge_w});
  out.push_back({"bridge_b", &bridge_b});
  out.push_back({"out_w", &out_w});
  out.push_back({"out_b", &out_b});
  return out;
}

std::vector<Tensor2*> ModelParams::tensor_ptrs() {
  std::vector<Tensor2*> out;
  for (auto& t : tensors()) out.push_back(t.tensor);
  return out;
}

std::vector<const Tensor2*> ModelParams::tensor_ptrs() const {
  std::vector<const Tensor2*> out;
  for (const auto& t : tensors()) out.push_back(t.tensor);
  return out;
}

void ModelParams::set_zero() {
  for (auto* t : tensor_ptrs()) t->fill(0.0);
}

bool ModelParams::all_finite() const {
  for (const auto* t : tensor_ptrs()) {
    if (!t->all_finite()) return false;
  }
  return true;
}

void check_shapes(const ModelParams& params, const ModelConfig& config, std::size_t n_words,
                  std::size_t n_targets) {
  const ModelParams expected = ModelParams::zeros(config, n_words, n_targets);
  const auto want = expected.tensors();
  const auto have = params.tensors();
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!want[i].tensor->same_shape(*have[i].tensor)) {
      throw Error("parameter " + want[i].name + " has shape " + have[i].tensor->shape_string() +
                  ", expected " + want[i].tensor->shape_string());
    }
  }
}

// ---------------------------------------------------------------------------
// Forward pieces

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct EncoderTrace {
  EncoderOutputs out;
  std::vector<int> ids;
  std::vector<LstmCache> fwd;  // by position
  std::vector<LstmCache> bwd;  // by position
};

EncoderTrace encode_traced(std::span<const int> source, const ModelParams& params,
                           const ModelConfig& config, bool keep_cache) {
  if (source.empty()) throw Error("encode: empty source sentence");
  const std::size_t n_words = params.enc_embed.rows();
  for (int id : source) {
    if (id < 0 || static_cast<std::size_t>(id) >= n_words) {
      throw Error("encode: word id " + std::to_string(id) + " out of range");
    }
  }
  const std::size_t h = config.enc_hidden;
  const std::size_t T = source.size();
  EncoderTrace tr;
  tr.ids.assign(source.begin(), source.end());
  tr.out.states = Tensor2(T, 2 * h);
  if (keep_cache) {
    tr.fwd.resize(T);
    tr.bwd.resize(T);
  }
  Vec hs(h, 0.0), cs(h, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    auto step = lstm_cell(params.enc_embed.row(static_cast<std::size_t>(source[t])), hs, cs,
                          params.enc_fwd);
    std::copy(step.h.begin(), step.h.end(), tr.out.states.row(t).begin());
    hs = std::move(step.h);
    cs = std::move(step.c);
    if (keep_cache) tr.fwd[t] = std::move(step.cache);
  }
  std::fill(hs.begin(), hs.end(), 0.0);
  std::fill(cs.begin(), cs.end(), 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = T - 1 - k;
    auto step = lstm_cell(params.enc_embed.row(static_cast<std::size_t>(source[t])), hs, cs,
                          params.enc_bwd);
    std::copy(step.h.begin(), step.h.end(), tr.out.states.row(t).begin() + static_cast<std::ptrdiff_t>(h));
    hs = std::move(step.h);
    cs = std::move(step.c);
    if (keep_cache) tr.bwd[t] = std::move(step.cache);
  }
  tr.out.final_state.resize(2 * h);
  const auto last = tr.out.states.row(T - 1);
  const auto first = tr.out.states.row(0);
  std::copy(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(h), tr.out.final_state.begin());
  std::copy(first.begin() + static_cast<std::ptrdiff_t>(h), first.end(),
            tr.out.final_state.begin() + static_cast<std::ptrdiff_t>(h));
  return tr;
}

struct StepTrace {
  int prev = 0;
  LstmCache lstm;
  Vec h;
  Vec c;
  Attention att;
  Vec feat;
  IdRange mask;
  Vec probs;  // over the mask, length mask.size()
  Vec log_probs;
};

StepTrace run_step(int step, int prev_id, const DecoderState& state, const EncoderOutputs& enc,
                   const ModelParams& params, const ModelConfig& config, const TripleVocab& vocab) {
  const IdRange mask = vocab.mask(step);
  if (prev_id < 0 || static_cast<std::size_t>(prev_id) >= params.dec_embed.rows()) {
    throw Error("decode_step: previous id " + std::to_string(prev_id) + " out of range");
  }
  if (step == 1 && prev_id != TripleVocab::kBos) {
    throw Error("decode_step: step 1 must be fed BOS");
  }
  StepTrace tr;
  tr.prev = prev_id;
  tr.mask = mask;
  auto cell = lstm_cell(params.dec_embed.row(static_cast<std::size_t>(prev_id)), state.h, state.c,
                        params.dec);
  tr.lstm = std::move(cell.cache);
  tr.h = std::move(cell.h);
  tr.c = std::move(cell.c);

  tr.feat = tr.h;
  if (config.use_attention) {
    tr.att = attend(tr.h, enc, params.attn);
    tr.feat.insert(tr.feat.end(), tr.att.context.begin(), tr.att.context.end());
  }

  const auto bias = params.out_b.values();
  tr.probs.resize(static_cast<std::size_t>(mask.size()));
  for (int j = mask.begin; j < mask.end; ++j) {
    tr.probs[static_cast<std::size_t>(j - mask.begin)] =
        dot(params.out_w.row(static_cast<std::size_t>(j)), tr.feat) + bias[static_cast<std::size_t>(j)];
  }
  // log-softmax restricted to the mask; everything outside has probability 0.
  const double peak = *std::max_element(tr.probs.begin(), tr.probs.end());
  double total = 0.0;
  for (double x : tr.probs) total += std::exp(x - peak);
  const double log_z = peak + std::log(total);
  tr.log_probs.assign(params.out_b.cols(), kNegInf);
  for (std::size_t k = 0; k < tr.probs.size(); ++k) {
    const double lp = tr.probs[k] - log_z;
    tr.log_probs[static_cast<std::size_t>(mask.begin) + k] = lp;
    tr.probs[k] = std::exp(lp);
  }
  return tr;
}

}  // namespace

EncoderOutputs encode(std::span<const int> source, const ModelParams& params,
                      const ModelConfig& config) {
  return encode_traced(source, params, config, false).out;
}

Attention attend(std::span<const double> dec_hidden, const EncoderOutputs& enc,
                 const Tensor2& attn_w) {
  const std::size_t T = enc.states.rows();
  Attention a;
  a.projected.assign(attn_w.cols(), 0.0);
  matvec_transposed_add(attn_w, dec_hidden, a.projected);
  a.weights.resize(T);
  for (std::size_t t = 0; t < T; ++t) a.weights[t] = dot(a.projected, enc.states.row(t));
  softmax_inplace(a.weights);
  a.context.assign(enc.states.cols(), 0.0);
  for (std::size_t t = 0; t < T; ++t) axpy(a.weights[t], enc.states.row(t), a.context);
  return a;
}

DecoderState initial_decoder_state(const EncoderOutputs& enc, const ModelParams& params) {
  DecoderState s;
  s.h.resize(params.bridge_w.rows());
  matvec(params.bridge_w, enc.final_state, s.h);
  axpy(1.0, params.bridge_b.values(), s.h);
  s.c.assign(s.h.size(), 0.0);
  return s;
}

StepOutput decode_step(int step, int prev_id, const DecoderState& state, const EncoderOutputs& enc,
                       const ModelParams& params, const ModelConfig& config,
                       const TripleVocab& vocab) {
  auto tr = run_step(step, prev_id, state, enc, params, config, vocab);
  StepOutput out;
  out.log_probs = std::move(tr.log_probs);
  out.state = {std::move(tr.h), std::move(tr.c)};
  out.attention = std::move(tr.att.weights);
  return out;
}

std::optional<EncodedExample> encode_example(const AnnotatedExample& ex, const WordVocab& words,
                                             const TripleVocab& targets,
                                             std::size_t max_source_len) {
  auto ids = encode_triple(ex.gold, targets);
  if (!ids || ex.tokens.empty()) return std::nullopt;
  EncodedExample out;
  out.source = encode_sentence(ex.tokens, words);
  if (out.source.size() > max_source_len) out.source.resize(max_source_len);
  out.target = *ids;
  return out;
}

// ---------------------------------------------------------------------------
// Loss and gradients

namespace {

void check_target(const EncodedExample& ex, const TripleVocab& vocab) {
  for (int s = 1; s <= 3; ++s) {
    if (!vocab.mask(s).contains(ex.target[static_cast<std::size_t>(s - 1)])) {
      throw Error("gold id " + std::to_string(ex.target[static_cast<std::size_t>(s - 1)]) +
                  " violates the step-" + std::to_string(s) + " partition");
    }
  }
}

double loss_impl(const EncodedExample& ex, const ModelParams& params, const ModelConfig& config,
                 const TripleVocab& vocab, ModelParams* grads, double scale) {
  check_target(ex, vocab);
  const bool backward = grads != nullptr;
  EncoderTrace enc = encode_traced(ex.source, params, config, backward);
  DecoderState state = initial_decoder_state(enc.out, params);

  std::array<StepTrace, 3> steps;
  std::array<Vec, 3> dlogits;
  double loss = 0.0;
  int prev = TripleVocab::kBos;
  for (int s = 0; s < 3; ++s) {
    steps[static_cast<std::size_t>(s)] = run_step(s + 1, prev, state, enc.out, params, config, vocab);
    auto& st = steps[static_cast<std::size_t>(s)];
    const int gold = ex.target[static_cast<std::size_t>(s)];
    auto ce = weighted_cross_entropy(st.probs, static_cast<std::size_t>(gold - st.mask.begin),
                                     config.step_weights[static_cast<std::size_t>(s)]);
    loss += ce.loss;
    dlogits[static_cast<std::size_t>(s)] = std::move(ce.grad);
    state = {st.h, st.c};
    prev = gold;
  }
  if (!backward) return loss;

  const std::size_t hd = config.dec_hidden;
  const std::size_t h = config.enc_hidden;
  const std::size_t T = ex.source.size();
  Tensor2 dstates(T, 2 * h);
  Vec dh_next(hd, 0.0), dc_next(hd, 0.0);
  Vec dfeat(config.feature_dim());
  for (int s = 2; s >= 0; --s) {
    const auto& st = steps[static_cast<std::size_t>(s)];
    Vec& dl = dlogits[static_cast<std::size_t>(s)];
    for (double& v : dl) v *= scale;

    std::fill(dfeat.begin(), dfeat.end(), 0.0);
    for (int j = st.mask.begin; j < st.mask.end; ++j) {
      const double g = dl[static_cast<std::size_t>(j - st.mask.begin)];
      axpy(g, params.out_w.row(static_cast<std::size_t>(j)), dfeat);
      axpy(g, st.feat, grads->out_w.row(static_cast<std::size_t>(j)));
      grads->out_b(0, static_cast<std::size_t>(j)) += g;
    }
    Vec ds(dfeat.begin(), dfeat.begin() + static_cast<std::ptrdiff_t>(hd));
    axpy(1.0, dh_next, ds);

    if (config.use_attention) {
      const auto& att = st.att;
      const std::span<const double> dctx(dfeat.data() + hd, 2 * h);
      Vec dalpha(T);
      for (std::size_t t = 0; t < T; ++t) {
        dalpha[t] = dot(dctx, enc.out.states.row(t));
        axpy(att.weights[t], dctx, dstates.row(t));
      }
      double mean = 0.0;
      for (std::size_t t = 0; t < T; ++t) mean += att.weights[t] * dalpha[t];
      Vec du(2 * h, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        const double dscore = att.weights[t] * (dalpha[t] - mean);
        axpy(dscore, att.projected, dstates.row(t));
        axpy(dscore, enc.out.states.row(t), du);
      }
      Vec ds_att(hd);
      matvec(params.attn, du, ds_att);
      axpy(1.0, ds_att, ds);
      outer_add(grads->attn, st.h, du);
    }

    auto g = lstm_cell_backward(ds, dc_next, st.lstm, params.dec, grads->dec);
    axpy(1.0, g.dx, grads->dec_embed.row(static_cast<std::size_t>(st.prev)));
    dh_next = std::move(g.dh_prev);
    dc_next = std::move(g.dc_prev);
  }

  // Bridge: h0 = W_b final + b_b.
  outer_add(grads->bridge_w, dh_next, enc.out.final_state);
  axpy(1.0, dh_next, grads->bridge_b.values());
  Vec dfinal(2 * h, 0.0);
  matvec_transposed_add(params.bridge_w, dh_next, dfinal);
  for (std::size_t k = 0; k < h; ++k) {
    dstates(T - 1, k) += dfinal[k];
    dstates(0, h + k) += dfinal[h + k];
  }

  Vec dh(h, 0.0), dc(h, 0.0), dtotal(h);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = T - 1 - k;
    for (std::size_t i = 0; i < h; ++i) dtotal[i] = dstates(t, i) + dh[i];
    auto g = lstm_cell_backward(dtotal, dc, enc.fwd[t], params.enc_fwd, grads->enc_fwd);
    axpy(1.0, g.dx, grads->enc_embed.row(static_cast<std::size_t>(enc.ids[t])));
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  std::fill(dh.begin(), dh.end(), 0.0);
  std::fill(dc.begin(), dc.end(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < h; ++i) dtotal[i] = dstates(t, h + i) + dh[i];
    auto g = lstm_cell_backward(dtotal, dc, enc.bwd[t], params.enc_bwd, grads->enc_bwd);
    axpy(1.0, g.dx, grads->enc_embed.row(static_cast<std::size_t>(enc.ids[t])));
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  return loss;
}

}  // namespace

LossResult forward_loss(const EncodedExample& ex, const ModelParams& params,
                        const ModelConfig& config, const TripleVocab& vocab) {
  LossResult out;
  out.grads = ModelParams::zeros(config, params.enc_embed.rows(), params.dec_embed.rows());
  out.loss = loss_impl(ex, params, config, vocab, &out.grads, 1.0);
  return out;
}

double accumulate_loss_gradient(const EncodedExample& ex, const ModelParams& params,
                                const ModelConfig& config, const TripleVocab& vocab,
                                ModelParams& grads, double scale) {
  return loss_impl(ex, params, config, vocab, &grads, scale);
}

double example_loss(const EncodedExample& ex, const ModelParams& params, const ModelConfig& config,
                    const TripleVocab& vocab) {
  return loss_impl(ex, params, config, vocab, nullptr, 1.0);
}

}  // namespace seq2rdf
