#include "seq2rdf/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "seq2rdf/error.hpp"
#include "seq2rdf/log.hpp"
#include "seq2rdf/parallel.hpp"

namespace seq2rdf {

WordVocab training_word_vocab(std::span<const AnnotatedExample> train, const ModelConfig& config,
                              const VectorFile* word_vectors) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(train.size());
  for (const auto& ex : train) sentences.push_back(ex.tokens);
  WordVocab vocab = build_word_vocab(sentences, config.min_count);
  if (config.use_word_init && word_vectors != nullptr) {
    for (const auto& token : word_vectors->tokens) vocab.add(token);
  }
  return vocab;
}

TripleVocab training_triple_vocab(std::span<const AnnotatedExample> train,
                                  std::span<const Triple> kg) {
  std::vector<Triple> all(kg.begin(), kg.end());
  for (const auto& ex : train) all.push_back(ex.gold);
  return build_kg_vocab(all);
}

PipelineResult train_pipeline(const PipelineInputs& inputs, const ModelConfig& config,
                              const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (inputs.train.empty()) throw Error("training split is empty");
  PipelineResult out;
  out.model.config = config;
  out.model.words = inputs.words ? *inputs.words
                                 : training_word_vocab(inputs.train, config, inputs.word_vectors);
  out.model.targets = inputs.targets ? *inputs.targets
                                     : training_triple_vocab(inputs.train, inputs.kg);

  // Separate streams from the ones train() uses for init and shuffling.
  SeededRng table_rng = SeededRng(config.seed).derive(7);
  std::optional<InitTable> word_table;
  std::optional<InitTable> kg_table;
  if (config.use_word_init) {
    if (inputs.word_vectors == nullptr) {
      throw Error("flag W needs pre-trained word vectors (pass --word-vectors)");
    }
    word_table = word_table_from_vectors(*inputs.word_vectors, out.model.words, config.word_dim,
                                         table_rng);
    out.word_coverage = word_table->coverage;
  }
  if (config.use_kg_init) {
    if (inputs.kg_embeddings == nullptr) {
      throw Error("flag G needs KG embeddings (pass --kg-embeddings)");
    }
    kg_table = decoder_table_from_kg(*inputs.kg_embeddings, out.model.targets, config.kg_dim,
                                     table_rng);
    out.kg_coverage = kg_table->coverage;
  }

  TrainInputs train_inputs;
  train_inputs.train = inputs.train;
  train_inputs.dev = inputs.dev;
  train_inputs.words = &out.model.words;
  train_inputs.targets = &out.model.targets;
  train_inputs.word_table = word_table ? &word_table->table : nullptr;
  train_inputs.kg_table = kg_table ? &kg_table->table : nullptr;
  out.training = train(train_inputs, config, on_epoch);
  out.model.params = out.training.params;
  return out;
}

Predictions predict(const Model& model, std::span<const AnnotatedExample> examples,
                    std::size_t beam_width, std::size_t threads) {
  if (beam_width == 0) throw Error("beam width must be at least 1");
  Predictions out;
  out.triples.resize(examples.size());
  out.golds.reserve(examples.size());
  for (const auto& ex : examples) out.golds.push_back(ex.gold);
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    const auto& tokens = examples[i].tokens;
    if (tokens.empty()) return;
    const DecodeResult best = beam_width == 1 ? translate_greedy(tokens, model)
                                              : translate_beam(tokens, model, beam_width).front();
    out.triples[i] = decode_triple(best.ids, model.targets);
  });
  return out;
}

EvalReport evaluate_model(const Model& model, std::span<const AnnotatedExample> examples,
                          std::span<const Triple> kg, std::size_t beam_width,
                          std::size_t threads) {
  const Predictions preds = predict(model, examples, beam_width, threads);
  EvalReport report = evaluate(preds.triples, preds.golds);
  if (!kg.empty()) report.error_counts = error_taxonomy(preds.triples, preds.golds, model.targets, kg);
  return report;
}

AblationGrid run_ablation(std::span<const AblationDataset> datasets, const AblationOptions& options,
                          const std::function<void(const std::string&)>& progress) {
  if (datasets.empty()) throw Error("ablation needs at least one dataset");
  if (options.seeds.empty()) throw Error("ablation needs at least one seed");
  AblationGrid grid;
  for (const auto& d : datasets) grid.columns.push_back(d.name);
  for (const auto& flags : options.flag_sets) {
    ModelConfig config = options.base;
    config.set_flags(flags);
    grid.rows.push_back(config.label());
    auto& row = grid.cells.emplace_back();
    for (const auto& d : datasets) {
      AblationCell cell;
      for (const auto seed : options.seeds) {
        config.seed = seed;
        std::optional<KgEmbeddings> emb;
        if (config.use_kg_init) {
          TransEConfig transe = options.transe;
          transe.dim = config.kg_dim;
          transe.seed = seed;
          emb = transe_train(d.kg, transe).embeddings;
        }
        PipelineInputs inputs;
        inputs.train = d.dataset.train;
        inputs.dev = d.dataset.dev;
        inputs.kg = d.kg;
        inputs.word_vectors = &d.word_vectors;
        inputs.kg_embeddings = emb ? &*emb : nullptr;
        const PipelineResult trained = train_pipeline(inputs, config);
        const EvalReport report =
            evaluate_model(trained.model, d.dataset.test, {}, 1, options.threads);
        cell.per_seed.push_back(report.f1);
        if (progress) {
          char f1[32];
          std::snprintf(f1, sizeof f1, "%.4f", report.f1);
          progress(config.label() + " " + d.name + " seed=" + std::to_string(seed) + " f1=" + f1);
        }
      }
      cell.median = median(cell.per_seed);
      row.push_back(std::move(cell));
    }
  }
  return grid;
}

}  // namespace seq2rdf
