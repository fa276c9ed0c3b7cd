#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seq2rdf/corpus.hpp"
#include "seq2rdf/embeddings.hpp"
#include "seq2rdf/eval.hpp"
#include "seq2rdf/model.hpp"

namespace seq2rdf {

// Word vocabulary from the training sentences. With W on, tokens of the
// word-vector file are appended so synonyms seen only in pre-training still
// get their own rows.
WordVocab training_word_vocab(std::span<const AnnotatedExample> train, const ModelConfig& config,
                              const VectorFile* word_vectors);

// Target vocabulary over the KG plus every training gold.
TripleVocab training_triple_vocab(std::span<const AnnotatedExample> train,
                                  std::span<const Triple> kg);

struct PipelineInputs {
  std::span<const AnnotatedExample> train;
  std::span<const AnnotatedExample> dev;
  std::span<const Triple> kg;
  const VectorFile* word_vectors = nullptr;      // needed with W
  const KgEmbeddings* kg_embeddings = nullptr;   // needed with G
  // Fixed vocabularies, e.g. from build-vocab. Built from the data when unset.
  const WordVocab* words = nullptr;
  const TripleVocab* targets = nullptr;
};

struct PipelineResult {
  Model model;
  TrainResult training;
  double word_coverage = 0.0;
  double kg_coverage = 0.0;
};

PipelineResult train_pipeline(const PipelineInputs& inputs, const ModelConfig& config,
                              const std::function<void(const EpochRecord&)>& on_epoch = {});

struct Predictions {
  std::vector<std::optional<Triple>> triples;  // nullopt for empty sentences
  std::vector<Triple> golds;
};

Predictions predict(const Model& model, std::span<const AnnotatedExample> examples,
                    std::size_t beam_width = 1, std::size_t threads = 1);

// Exact-match report; the error taxonomy is filled when `kg` is non-empty.
EvalReport evaluate_model(const Model& model, std::span<const AnnotatedExample> examples,
                          std::span<const Triple> kg, std::size_t beam_width = 1,
                          std::size_t threads = 1);

struct AblationDataset {
  std::string name;
  Dataset dataset;
  std::vector<Triple> kg;
  VectorFile word_vectors;
};

struct AblationOptions {
  ModelConfig base;
  TransEConfig transe;
  std::vector<std::string> flag_sets{"none", "A", "A,W", "A,W,G"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t threads = 1;
};

// Test-split F1 for every (flag set, dataset, seed), with per-cell medians.
AblationGrid run_ablation(std::span<const AblationDataset> datasets, const AblationOptions& options,
                          const std::function<void(const std::string&)>& progress = {});

}  // namespace seq2rdf
