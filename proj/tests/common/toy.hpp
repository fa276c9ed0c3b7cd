#pragma once

// Small fixtures shared by the unit and acceptance tests.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "seq2rdf/model.hpp"
#include "seq2rdf/numerics/rng.hpp"

namespace toy {

// d_w = d_k = 8, h = 8, h_d = 16.
inline seq2rdf::ModelConfig tiny_config(bool attention = true) {
  seq2rdf::ModelConfig cfg;
  cfg.word_dim = cfg.kg_dim = 8;
  cfg.enc_hidden = 8;
  cfg.dec_hidden = 16;
  cfg.use_attention = attention;
  cfg.use_word_init = cfg.use_kg_init = false;
  return cfg;
}

// 3 reserved + (n_words - 3) regular tokens w0, w1, ...
inline seq2rdf::WordVocab words(std::size_t n_words = 20) {
  seq2rdf::WordVocab v;
  for (std::size_t i = 0; v.size() < n_words; ++i) v.add("w" + std::to_string(i));
  return v;
}

inline seq2rdf::TripleVocab targets(std::size_t entities = 6, std::size_t predicates = 3) {
  std::vector<std::string> e, p;
  for (std::size_t i = 0; i < entities; ++i) e.push_back("ent:E" + std::to_string(i));
  for (std::size_t i = 0; i < predicates; ++i) p.push_back("rel:p" + std::to_string(i));
  return {e, p};
}

// Random parameters at a larger scale than training init so outputs are far
// from uniform and gradients are not tiny.
inline seq2rdf::ModelParams random_params(const seq2rdf::ModelConfig& cfg, std::size_t n_words,
                                          std::size_t n_targets, seq2rdf::SeededRng& rng,
                                          double scale = 0.5) {
  auto p = seq2rdf::ModelParams::zeros(cfg, n_words, n_targets);
  for (auto* t : p.tensor_ptrs()) {
    for (double& v : t->values()) v = rng.uniform(-scale, scale);
  }
  return p;
}

inline seq2rdf::EncodedExample random_example(const seq2rdf::TripleVocab& vocab,
                                              std::size_t n_words, std::size_t length,
                                              seq2rdf::SeededRng& rng) {
  seq2rdf::EncodedExample ex;
  for (std::size_t i = 0; i < length; ++i) {
    ex.source.push_back(static_cast<int>(3 + rng.index(n_words - 3)));
  }
  const auto ent = vocab.entity_range(), pred = vocab.predicate_range();
  ex.target = {ent.begin + static_cast<int>(rng.index(static_cast<std::size_t>(ent.end - ent.begin))),
               pred.begin + static_cast<int>(rng.index(static_cast<std::size_t>(pred.end - pred.begin))),
               ent.begin + static_cast<int>(rng.index(static_cast<std::size_t>(ent.end - ent.begin)))};
  return ex;
}

}  // namespace toy
