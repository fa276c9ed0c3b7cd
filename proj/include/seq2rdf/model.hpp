#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seq2rdf/config.hpp"
#include "seq2rdf/corpus.hpp"
#include "seq2rdf/embeddings.hpp"
#include "seq2rdf/numerics/adam.hpp"
#include "seq2rdf/numerics/lstm.hpp"
#include "seq2rdf/numerics/rng.hpp"
#include "seq2rdf/numerics/tensor.hpp"
#include "seq2rdf/vocab.hpp"

namespace seq2rdf {

struct ModelConfig {
  std::size_t word_dim = 64;
  std::size_t kg_dim = 64;
  std::size_t enc_hidden = 64;
  std::size_t dec_hidden = 128;
  bool use_attention = true;  // A
  bool use_word_init = true;  // W
  bool use_kg_init = true;    // G
  std::size_t max_source_len = 64;
  std::size_t min_count = 1;
  std::uint64_t seed = 1;
  AdamConfig adam;
  double clip_norm = 5.0;
  double init_scale = 0.08;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  // Epochs without dev improvement before stopping; 0 disables early stopping.
  std::size_t patience = 5;
  std::array<double, 3> step_weights{1.0, 1.0, 1.0};

  void validate() const;

  // Parses "A,W,G" style flag lists; "none" or "" clears all three.
  void set_flags(std::string_view flags);
  std::string flags_string() const;
  // Ablation row label: Seq2Seq, S+A, S+A+W, S+A+W+G, ...
  std::string label() const;

  // Throws seq2rdf::Error for unknown keys or unparseable values.
  void set(const std::string& key, const std::string& value);
  KeyValues to_key_values() const;
  std::size_t feature_dim() const { return dec_hidden + (use_attention ? 2 * enc_hidden : 0); }
};

// All trainable tensors. Also used as the gradient accumulator.
struct ModelParams {
  Tensor2 enc_embed;  // |V_w| x word_dim
  LstmWeights enc_fwd;
  LstmWeights enc_bwd;
  Tensor2 dec_embed;  // |V_t| x kg_dim
  LstmWeights dec;
  Tensor2 attn;      // dec_hidden x 2 enc_hidden
  Tensor2 bridge_w;  // dec_hidden x 2 enc_hidden
  Tensor2 bridge_b;  // 1 x dec_hidden
  Tensor2 out_w;     // |V_t| x feature_dim
  Tensor2 out_b;     // 1 x |V_t|

  static ModelParams zeros(const ModelConfig& config, std::size_t n_words, std::size_t n_targets);
  static ModelParams random(const ModelConfig& config, std::size_t n_words, std::size_t n_targets,
                            SeededRng& rng);

  std::vector<NamedTensor> tensors();
  std::vector<ConstNamedTensor> tensors() const;
  std::vector<Tensor2*> tensor_ptrs();
  std::vector<const Tensor2*> tensor_ptrs() const;
  void set_zero();
  bool all_finite() const;

  bool operator==(const ModelParams&) const = default;
};

// Throws seq2rdf::Error naming the first tensor whose shape disagrees.
void check_shapes(const ModelParams& params, const ModelConfig& config, std::size_t n_words,
                  std::size_t n_targets);

// Everything needed to translate: configuration, vocabularies and weights.
struct Model {
  ModelConfig config;
  WordVocab words;
  TripleVocab targets;
  ModelParams params;

};

struct EncoderOutputs {
  Tensor2 states;   // T x 2h, row t = [fwd_h[t]; bwd_h[t]]
  Vec final_state;  // [fwd_h[T-1]; bwd_h[0]]
};

EncoderOutputs encode(std::span<const int> source, const ModelParams& params,
                      const ModelConfig& config);

struct Attention {
  Vec context;    // 2h
  Vec weights;    // T
  Vec projected;  // W_a^T dec_hidden, reused by the backward pass
};

// Bilinear scores s_t = dec_hidden^T W_a H[t], softmax weights, weighted sum.
Attention attend(std::span<const double> dec_hidden, const EncoderOutputs& enc,
                 const Tensor2& attn_w);

struct DecoderState {
  Vec h;
  Vec c;
};

// h = bridge_w * final_state + bridge_b, c = 0.
DecoderState initial_decoder_state(const EncoderOutputs& enc, const ModelParams& params);

struct StepOutput {
  Vec log_probs;  // |V_t|, -infinity outside the step mask
  DecoderState state;
  Vec attention;  // empty without attention
};

StepOutput decode_step(int step, int prev_id, const DecoderState& state, const EncoderOutputs& enc,
                       const ModelParams& params, const ModelConfig& config,
                       const TripleVocab& vocab);

struct EncodedExample {
  std::vector<int> source;
  TripleIds target;
};

// nullopt when the gold triple is outside `targets` or the sentence is empty.
// Sources longer than max_source_len are truncated.
std::optional<EncodedExample> encode_example(const AnnotatedExample& ex, const WordVocab& words,
                                             const TripleVocab& targets,
                                             std::size_t max_source_len);

struct LossResult {
  double loss = 0.0;
  ModelParams grads;
};

// -sum_t w_t log p(y_t | y_<t, X) under teacher forcing, with exact gradients.
LossResult forward_loss(const EncodedExample& ex, const ModelParams& params,
                        const ModelConfig& config, const TripleVocab& vocab);

// As forward_loss, adding scale * gradient into `grads`. Returns the loss.
double accumulate_loss_gradient(const EncodedExample& ex, const ModelParams& params,
                                const ModelConfig& config, const TripleVocab& vocab,
                                ModelParams& grads, double scale);

// Loss only.
double example_loss(const EncodedExample& ex, const ModelParams& params, const ModelConfig& config,
                    const TripleVocab& vocab);

struct DecodeResult {
  TripleIds ids{};
  std::array<double, 3> step_log_probs{};
  double total_log_prob = 0.0;
  std::vector<Vec> attention;  // 3 rows of length T, empty without attention
  std::size_t source_tokens = 0;
  std::size_t unknown_tokens = 0;
  bool truncated = false;
};

DecodeResult decode_greedy(std::span<const int> source, const ModelParams& params,
                           const ModelConfig& config, const TripleVocab& vocab);
// Sorted by total log-prob, best first; ties broken by lower id sequence.
std::vector<DecodeResult> decode_beam(std::span<const int> source, const ModelParams& params,
                                      const ModelConfig& config, const TripleVocab& vocab,
                                      std::size_t width);

DecodeResult translate_greedy(std::span<const std::string> tokens, const Model& model);
std::vector<DecodeResult> translate_beam(std::span<const std::string> tokens, const Model& model,
                                         std::size_t width);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double dev_f1 = 0.0;
  bool improved = false;
  double wall_seconds = 0.0;
};

// One line per epoch. Wall time is appended only when requested, so logs stay
// byte-identical between runs by default.
std::string format_epoch_record(const EpochRecord& record, bool with_wall_time = false);

struct TrainInputs {
  std::span<const AnnotatedExample> train;
  // When empty, the training split doubles as the selection set.
  std::span<const AnnotatedExample> dev;
  const WordVocab* words = nullptr;
  const TripleVocab* targets = nullptr;
  // Required when the W / G flags are on.
  const Tensor2* word_table = nullptr;
  const Tensor2* kg_table = nullptr;
};

struct TrainResult {
  ModelParams params;  // best-dev parameters
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_dev_f1 = -1.0;
  std::size_t dropped_train = 0;
  std::size_t dropped_dev = 0;
  bool diverged = false;
  std::string diagnostic;
};

// Initial parameters for `train`: random from the seed, with the embedding
// tables replaced by the pre-trained ones when W / G are on.
ModelParams initial_params(const TrainInputs& inputs, const ModelConfig& config);

TrainResult train(const TrainInputs& inputs, const ModelConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

// Fraction of examples whose greedy decode equals the gold ids.
double exact_match_accuracy(std::span<const EncodedExample> examples, const ModelParams& params,
                            const ModelConfig& config, const TripleVocab& vocab);

}  // namespace seq2rdf
