#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seq2rdf/numerics/rng.hpp"
#include "seq2rdf/triple.hpp"

namespace seq2rdf {

// A tokenized sentence with its single gold triple.
struct AnnotatedExample {
  std::vector<std::string> tokens;
  Triple gold;
  std::string source_id;

  bool operator==(const AnnotatedExample&) const = default;
};

struct Dataset {
  std::vector<AnnotatedExample> train;
  std::vector<AnnotatedExample> dev;
  std::vector<AnnotatedExample> test;
};

using Alias = std::vector<std::string>;

class KnowledgeGraph {
 public:
  // Duplicate triples are ignored.
  void add_triple(const Triple& triple);
  // The alias is tokenized with tokenize(); an alias that tokenizes to nothing
  // is rejected.
  void add_alias(const std::string& entity, const std::string& alias);
  void add_alias_tokens(const std::string& entity, Alias alias);
  // Adds the local name of every entity lacking an alias, e.g.
  // "dbr:New_York" -> "new york".
  void add_default_aliases();

  const std::vector<Triple>& triples() const { return triples_; }
  const std::map<std::string, std::vector<Alias>>& surface_forms() const { return surface_forms_; }
  std::vector<std::string> entities() const;
  bool contains(const Triple& triple) const;

 private:
  std::vector<Triple> triples_;  // kept sorted
  std::map<std::string, std::vector<Alias>> surface_forms_;
};

// "dbr:New_York" -> "New York"
std::string local_name(const std::string& symbol);

// Tab-separated subject, predicate, object per line.
std::vector<Triple> load_kg_triples(const std::filesystem::path& path);
void save_kg_triples(const std::filesystem::path& path, std::span<const Triple> triples);
// Tab-separated entity, alias per line.
void load_surface_forms(const std::filesystem::path& path, KnowledgeGraph& kg);
KnowledgeGraph load_knowledge_graph(const std::filesystem::path& kg_path,
                                    const std::filesystem::path& surface_forms_path);

// One JSON object per line: {"tokens": [...], "triple": [s, p, o]} with an
// optional "id" and an optional "split" in {train, dev, test}.
std::vector<AnnotatedExample> parse_examples(const std::string& text,
                                             const std::string& origin = "<memory>");
std::vector<AnnotatedExample> load_examples(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::string example_to_json_line(const AnnotatedExample& ex, const std::string& split = "");
void save_examples(const std::filesystem::path& path, std::span<const AnnotatedExample> examples,
                   const std::string& split = "");

struct RawSentence {
  std::string source_id;
  std::vector<std::string> tokens;
};

// One raw sentence per line; ids are "s<line number>".
std::vector<RawSentence> load_sentences(const std::filesystem::path& path);

struct AmbiguityEntry {
  std::string source_id;
  std::vector<std::string> tokens;
  Triple triple;
};

struct AlignmentResult {
  std::vector<AnnotatedExample> examples;
  std::vector<AmbiguityEntry> ambiguous;
  std::size_t unmatched = 0;
};

struct AlignOptions {
  // Emit one example per matching triple instead of excluding the sentence.
  bool keep_ambiguous = false;
  std::size_t threads = 1;
};

// Pairs each sentence with the KG triple whose subject and object aliases both
// occur in it on non-overlapping spans. Sentences matching several triples go
// to the ambiguity report.
AlignmentResult distant_supervise(const KnowledgeGraph& kg, std::span<const RawSentence> sentences,
                                  const AlignOptions& options = {});

// Shuffles by source_id group and cuts train/dev/test by `ratios`.
Dataset split_dataset(std::span<const AnnotatedExample> examples, std::array<double, 3> ratios,
                      SeededRng& rng);

// k disjoint folds whose union is the input.
std::vector<std::vector<AnnotatedExample>> make_folds(std::span<const AnnotatedExample> examples,
                                                      std::size_t k, SeededRng& rng);

}  // namespace seq2rdf
