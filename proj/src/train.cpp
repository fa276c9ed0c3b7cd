#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "seq2rdf/error.hpp"
#include "seq2rdf/model.hpp"
#include "seq2rdf/numerics/ops.hpp"

namespace seq2rdf {

std::string format_epoch_record(const EpochRecord& record, bool with_wall_time) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch=%zu train_loss=%.9f dev_loss=%.9f dev_f1=%.6f best=%d",
                record.epoch, record.train_loss, record.dev_loss, record.dev_f1,
                record.improved ? 1 : 0);
  std::string out = buf;
  if (with_wall_time) {
    std::snprintf(buf, sizeof buf, " wall_s=%.3f", record.wall_seconds);
    out += buf;
  }
  return out;
}

double exact_match_accuracy(std::span<const EncodedExample> examples, const ModelParams& params,
                            const ModelConfig& config, const TripleVocab& vocab) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    correct += decode_greedy(ex.source, params, config, vocab).ids == ex.target;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

ModelParams initial_params(const TrainInputs& inputs, const ModelConfig& config) {
  if (inputs.words == nullptr || inputs.targets == nullptr) {
    throw Error("training needs both vocabularies");
  }
  SeededRng rng = SeededRng(config.seed).derive(0);
  ModelParams params =
      ModelParams::random(config, inputs.words->size(), inputs.targets->size(), rng);
  if (config.use_word_init) {
    if (inputs.word_table == nullptr) {
      throw Error("flag W needs pre-trained word vectors (pass --word-vectors)");
    }
    if (!inputs.word_table->same_shape(params.enc_embed)) {
      throw Error("word embedding table is " + inputs.word_table->shape_string() + ", expected " +
                  params.enc_embed.shape_string());
    }
    params.enc_embed = *inputs.word_table;
  }
  if (config.use_kg_init) {
    if (inputs.kg_table == nullptr) {
      throw Error("flag G needs KG embeddings (pass --kg-embeddings)");
    }
    if (!inputs.kg_table->same_shape(params.dec_embed)) {
      throw Error("decoder embedding table is " + inputs.kg_table->shape_string() +
                  ", expected " + params.dec_embed.shape_string());
    }
    params.dec_embed = *inputs.kg_table;
  }
  return params;
}

namespace {

std::vector<EncodedExample> encode_all(std::span<const AnnotatedExample> examples,
                                       const TrainInputs& inputs, const ModelConfig& config,
                                       std::size_t& dropped) {
  std::vector<EncodedExample> out;
  dropped = 0;
  for (const auto& ex : examples) {
    if (auto enc = encode_example(ex, *inputs.words, *inputs.targets, config.max_source_len)) {
      out.push_back(std::move(*enc));
    } else {
      ++dropped;
    }
  }
  return out;
}

}  // namespace

TrainResult train(const TrainInputs& inputs, const ModelConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  TrainResult result;
  ModelParams params = initial_params(inputs, config);
  const auto train_set = encode_all(inputs.train, inputs, config, result.dropped_train);
  if (train_set.empty()) throw Error("no usable training examples");
  const auto dev_set = inputs.dev.empty()
                           ? train_set
                           : encode_all(inputs.dev, inputs, config, result.dropped_dev);

  std::vector<Tensor2*> param_ptrs = params.tensor_ptrs();
  AdamState adam(config.adam, std::vector<const Tensor2*>(param_ptrs.begin(), param_ptrs.end()));
  ModelParams grads = ModelParams::zeros(config, inputs.words->size(), inputs.targets->size());
  std::vector<Tensor2*> grad_ptrs = grads.tensor_ptrs();
  const std::vector<const Tensor2*> grad_cptrs(grad_ptrs.begin(), grad_ptrs.end());

  SeededRng order_rng = SeededRng(config.seed).derive(1);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  result.params = params;
  std::size_t stale = 0;
  double best_dev_loss = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size() && !result.diverged; b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - b);
      grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t k = b; k < end; ++k) {
        batch_loss += accumulate_loss_gradient(train_set[order[k]], params, config,
                                               *inputs.targets, grads, scale);
      }
      if (!std::isfinite(batch_loss) || !grads.all_finite()) {
        result.diverged = true;
        result.diagnostic = "non-finite loss in epoch " + std::to_string(epoch) +
                            " at batch starting " + std::to_string(b) +
                            "; keeping parameters from epoch " + std::to_string(result.best_epoch);
        break;
      }
      epoch_loss += batch_loss;
      clip_global_norm(grad_ptrs, config.clip_norm);
      adam_step(param_ptrs, grad_cptrs, adam);
    }
    if (result.diverged) break;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    rec.dev_f1 = exact_match_accuracy(dev_set, params, config, *inputs.targets);
    for (const auto& ex : dev_set) rec.dev_loss += example_loss(ex, params, config, *inputs.targets);
    rec.dev_loss /= static_cast<double>(dev_set.size());
    // Ties on F1 go to the lower dev loss, so a saturated F1 keeps improving.
    rec.improved = rec.dev_f1 > result.best_dev_f1 ||
                   (rec.dev_f1 == result.best_dev_f1 && rec.dev_loss < best_dev_loss);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rec.improved) {
      result.best_dev_f1 = rec.dev_f1;
      best_dev_loss = rec.dev_loss;
      result.best_epoch = epoch;
      result.params = params;
      stale = 0;
    } else {
      ++stale;
    }
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (config.patience > 0 && stale >= config.patience) break;
  }
  return result;
}

}  // namespace seq2rdf
