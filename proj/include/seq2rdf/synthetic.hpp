#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seq2rdf/corpus.hpp"
#include "seq2rdf/embeddings.hpp"

namespace seq2rdf {

// Generated corpora for fixtures, demos and the ablation trend check.
struct SyntheticCorpus {
  Dataset dataset;
  std::vector<Triple> kg;
  // entity symbol -> alias text
  std::vector<std::pair<std::string, std::string>> surface_forms;
  // Stand-in for pre-trained domain word vectors.
  VectorFile word_vectors;
};

struct MemorizationOptions {
  std::size_t entities = 12;
  std::size_t predicates = 4;
  std::size_t sentences = 60;
  std::size_t word_dim = 64;
  std::uint64_t seed = 1;
};

// Single-token entity names, templated sentences, one distinct triple per
// sentence. Everything lands in the train split.
SyntheticCorpus make_memorization_corpus(const MemorizationOptions& options);

struct AblationCorpusOptions {
  std::size_t entities = 24;
  std::size_t kg_triples = 90;
  std::size_t train_sentences = 100;
  std::size_t dev_sentences = 30;
  std::size_t test_sentences = 60;
  std::size_t word_dim = 64;
  std::uint64_t seed = 1;
};

// Two-token entity names built from a small pool of shared tokens, five
// predicates each expressed by four synonymous trigger phrases. Training
// sentences mostly use the first two phrasings, test sentences all four, so
// generalization depends on knowing that the phrasings are related. The word
// vectors place synonymous trigger words near a per-predicate prototype.
SyntheticCorpus make_ablation_corpus(const AblationCorpusOptions& options);

// The single annotated pair "Berlin is the capital city of Germany." ->
// (dbr:Germany, dbo:capital, dbr:Berlin).
AnnotatedExample capital_example();

}  // namespace seq2rdf
