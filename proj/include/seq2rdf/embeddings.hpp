#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "seq2rdf/numerics/rng.hpp"
#include "seq2rdf/numerics/tensor.hpp"
#include "seq2rdf/triple.hpp"
#include "seq2rdf/vocab.hpp"

namespace seq2rdf {

enum class NormKind { kL1, kL2 };

std::string_view norm_name(NormKind norm);
NormKind parse_norm(std::string_view name);

// ||h + r - t|| under the chosen norm.
double transe_score(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t, NormKind norm);

struct TransEConfig {
  std::size_t dim = 64;
  double margin = 1.0;
  double lr = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  NormKind norm = NormKind::kL2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct IndexedTriple {
  int head;
  int relation;
  int tail;
  auto operator<=>(const IndexedTriple&) const = default;
};

// Triples mapped to dense entity/relation indices, with a membership set for
// filtered corruption.
class IndexedKg {
 public:
  explicit IndexedKg(std::span<const Triple> triples);

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<IndexedTriple>& triples() const { return triples_; }
  bool contains(const IndexedTriple& t) const { return members_.count(t) != 0; }
  std::optional<int> entity(std::string_view symbol) const;
  std::optional<int> relation(std::string_view symbol) const;

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, int> entity_index_;
  std::unordered_map<std::string, int> relation_index_;
  std::vector<IndexedTriple> triples_;
  std::set<IndexedTriple> members_;
};

// Replaces head or tail (fair coin) by a uniformly drawn entity, redrawing
// while the result is a KG member. Throws when no corruption exists.
IndexedTriple negative_sample(const IndexedTriple& positive, const IndexedKg& kg, SeededRng& rng);

struct KgEmbeddings {
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  Tensor2 entity_table;    // |E| x dim
  Tensor2 relation_table;  // |R| x dim
  std::size_t dim = 0;
  NormKind norm = NormKind::kL2;
  double margin = 1.0;
  std::uint64_t seed = 0;

  std::optional<std::size_t> entity_row(std::string_view symbol) const;
  std::optional<std::size_t> relation_row(std::string_view symbol) const;

  bool operator==(const KgEmbeddings&) const = default;
};

// Random unit-norm entities and relations, indexed like `kg`.
KgEmbeddings transe_init(const IndexedKg& kg, const TransEConfig& config, SeededRng& rng);

// One SGD step on the margin ranking loss over paired positives/negatives,
// followed by unit renormalization of every entity row the step touched.
// Returns the summed hinge loss of the batch before the update.
double transe_sgd_batch(KgEmbeddings& emb, std::span<const IndexedTriple> positives,
                        std::span<const IndexedTriple> negatives, const TransEConfig& config);

struct TransEResult {
  KgEmbeddings embeddings;
  std::vector<double> epoch_losses;
};

TransEResult transe_train(std::span<const Triple> triples, const TransEConfig& config);

struct LinkPredictionReport {
  double mean_rank = 0.0;
  double hits_at_1 = 0.0;
  double hits_at_3 = 0.0;
  double hits_at_10 = 0.0;
  std::size_t queries = 0;
};

// Raw ranking of the true tail among all entities for (h, r, ?), and of the
// true head for (?, r, t). Rank is 1 + the number of strictly better
// candidates.
LinkPredictionReport link_prediction_eval(const KgEmbeddings& emb, std::span<const Triple> triples);

// entities.vec, relations.vec (word-vector text format) and manifest.txt.
void save_kg_embeddings(const std::filesystem::path& dir, const KgEmbeddings& emb);
KgEmbeddings load_kg_embeddings(const std::filesystem::path& dir);

struct VectorFile {
  std::vector<std::string> tokens;
  Tensor2 vectors;  // tokens.size() x dim
};

// Optional "count dim" header, then "token v1 ... vd" lines.
VectorFile read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path, std::span<const std::string> tokens,
                       const Tensor2& vectors);

struct InitTable {
  Tensor2 table;
  std::vector<bool> covered;  // per row
  std::size_t found = 0;
  double coverage = 0.0;
};

// Encoder embedding table: rows of covered tokens copied from the file,
// everything else (including PAD/UNK/BOS) uniform(-0.08, 0.08).
InitTable load_word_vectors(const std::filesystem::path& path, const WordVocab& vocab,
                            std::size_t dim, SeededRng& rng);
InitTable word_table_from_vectors(const VectorFile& file, const WordVocab& vocab, std::size_t dim,
                                  SeededRng& rng);

// Decoder embedding table in the unified target space: entity vectors at
// entity ids, relation vectors at predicate ids, random BOS and uncovered rows.
InitTable decoder_table_from_kg(const KgEmbeddings& emb, const TripleVocab& vocab, std::size_t dim,
                                SeededRng& rng);

}  // namespace seq2rdf
