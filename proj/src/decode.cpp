#include <algorithm>

#include "seq2rdf/error.hpp"
#include "seq2rdf/log.hpp"
#include "seq2rdf/model.hpp"

namespace seq2rdf {

DecodeResult decode_greedy(std::span<const int> source, const ModelParams& params,
                           const ModelConfig& config, const TripleVocab& vocab) {
  const EncoderOutputs enc = encode(source, params, config);
  DecoderState state = initial_decoder_state(enc, params);
  DecodeResult result;
  result.source_tokens = source.size();
  int prev = TripleVocab::kBos;
  for (int step = 1; step <= 3; ++step) {
    auto out = decode_step(step, prev, state, enc, params, config, vocab);
    const IdRange mask = vocab.mask(step);
    int best = mask.begin;
    for (int j = mask.begin + 1; j < mask.end; ++j) {
      if (out.log_probs[static_cast<std::size_t>(j)] > out.log_probs[static_cast<std::size_t>(best)]) {
        best = j;
      }
    }
    const auto slot = static_cast<std::size_t>(step - 1);
    result.ids[slot] = best;
    result.step_log_probs[slot] = out.log_probs[static_cast<std::size_t>(best)];
    result.total_log_prob += result.step_log_probs[slot];
    if (config.use_attention) result.attention.push_back(std::move(out.attention));
    state = std::move(out.state);
    prev = best;
  }
  return result;
}

namespace {

struct Hypothesis {
  std::vector<int> ids;
  std::vector<double> step_log_probs;
  double total = 0.0;
  DecoderState state;
  std::vector<Vec> attention;
};

bool better(double score_a, const std::vector<int>& ids_a, double score_b,
            const std::vector<int>& ids_b) {
  if (score_a != score_b) return score_a > score_b;
  return ids_a < ids_b;
}

}  // namespace

std::vector<DecodeResult> decode_beam(std::span<const int> source, const ModelParams& params,
                                      const ModelConfig& config, const TripleVocab& vocab,
                                      std::size_t width) {
  if (width < 1) throw Error("beam width must be at least 1");
  const EncoderOutputs enc = encode(source, params, config);
  std::vector<Hypothesis> beam(1);
  beam[0].state = initial_decoder_state(enc, params);

  for (int step = 1; step <= 3; ++step) {
    struct Candidate {
      std::size_t parent;
      int id;
      double score;
      std::vector<int> ids;
    };
    std::vector<Candidate> candidates;
    std::vector<StepOutput> outputs;
    outputs.reserve(beam.size());
    const IdRange mask = vocab.mask(step);
    for (std::size_t b = 0; b < beam.size(); ++b) {
      const int prev = beam[b].ids.empty() ? TripleVocab::kBos : beam[b].ids.back();
      outputs.push_back(decode_step(step, prev, beam[b].state, enc, params, config, vocab));
      for (int j = mask.begin; j < mask.end; ++j) {
        Candidate c{b, j, beam[b].total + outputs.back().log_probs[static_cast<std::size_t>(j)],
                    beam[b].ids};
        c.ids.push_back(j);
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return better(a.score, a.ids, b.score, b.ids);
    });
    if (candidates.size() > width) candidates.resize(width);

    std::vector<Hypothesis> next;
    next.reserve(candidates.size());
    for (auto& c : candidates) {
      const Hypothesis& parent = beam[c.parent];
      const StepOutput& out = outputs[c.parent];
      Hypothesis h;
      h.ids = std::move(c.ids);
      h.step_log_probs = parent.step_log_probs;
      h.step_log_probs.push_back(out.log_probs[static_cast<std::size_t>(c.id)]);
      h.total = c.score;
      h.state = out.state;
      h.attention = parent.attention;
      if (config.use_attention) h.attention.push_back(out.attention);
      next.push_back(std::move(h));
    }
    beam = std::move(next);
  }

  std::vector<DecodeResult> results;
  results.reserve(beam.size());
  for (auto& h : beam) {
    DecodeResult r;
    for (std::size_t s = 0; s < 3; ++s) {
      r.ids[s] = h.ids[s];
      r.step_log_probs[s] = h.step_log_probs[s];
    }
    // Sum in step order so the total matches decode_greedy bit for bit.
    r.total_log_prob = (r.step_log_probs[0] + r.step_log_probs[1]) + r.step_log_probs[2];
    r.attention = std::move(h.attention);
    r.source_tokens = source.size();
    results.push_back(std::move(r));
  }
  return results;
}

namespace {

std::vector<int> prepare_source(std::span<const std::string> tokens, const Model& model,
                                std::size_t& unknown, bool& truncated) {
  if (tokens.empty()) throw Error("cannot translate an empty sentence");
  std::vector<int> ids = encode_sentence(tokens, model.words);
  truncated = ids.size() > model.config.max_source_len;
  if (truncated) {
    log::warning("sentence of " + std::to_string(ids.size()) + " tokens truncated to " +
                 std::to_string(model.config.max_source_len));
    ids.resize(model.config.max_source_len);
  }
  unknown = static_cast<std::size_t>(std::count(ids.begin(), ids.end(), WordVocab::kUnk));
  return ids;
}

}  // namespace

DecodeResult translate_greedy(std::span<const std::string> tokens, const Model& model) {
  std::size_t unknown = 0;
  bool truncated = false;
  const auto ids = prepare_source(tokens, model, unknown, truncated);
  auto r = decode_greedy(ids, model.params, model.config, model.targets);
  r.unknown_tokens = unknown;
  r.truncated = truncated;
  return r;
}

std::vector<DecodeResult> translate_beam(std::span<const std::string> tokens, const Model& model,
                                         std::size_t width) {
  std::size_t unknown = 0;
  bool truncated = false;
  const auto ids = prepare_source(tokens, model, unknown, truncated);
  auto results = decode_beam(ids, model.params, model.config, model.targets, width);
  for (auto& r : results) {
    r.unknown_tokens = unknown;
    r.truncated = truncated;
  }
  return results;
}

}  // namespace seq2rdf
