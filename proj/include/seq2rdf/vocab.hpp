#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seq2rdf/triple.hpp"

namespace seq2rdf {

// Source-side token table. Ids 0..2 are reserved.
class WordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr std::array<std::string_view, 3> kReserved{"<pad>", "<unk>", "<bos>"};

  WordVocab();

  // Rebuilds a vocabulary from its serialized symbol list. The first three
  // entries must be the reserved symbols.
  static WordVocab from_symbols(std::vector<std::string> symbols);

  // Appends `token` if absent and returns its id.
  int add(const std::string& token);

  std::optional<int> find(std::string_view token) const;
  // UNK for unknown tokens.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool operator==(const WordVocab& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Half-open range of unified target ids.
struct IdRange {
  int begin = 0;
  int end = 0;
  bool contains(int id) const { return id >= begin && id < end; }
  int size() const { return end - begin; }
};

// Target-side table. The unified id space is BOS (0), then entities, then
// predicates. Decoding step 1 and 3 draw from the entity range, step 2 from the
// predicate range.
class TripleVocab {
 public:
  static constexpr int kBos = 0;

  TripleVocab() = default;
  TripleVocab(std::vector<std::string> entities, std::vector<std::string> predicates);

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_predicates() const { return predicates_.size(); }
  // Including BOS.
  std::size_t size() const { return 1 + entities_.size() + predicates_.size(); }

  IdRange entity_range() const { return {1, 1 + static_cast<int>(entities_.size())}; }
  IdRange predicate_range() const {
    const int base = 1 + static_cast<int>(entities_.size());
    return {base, base + static_cast<int>(predicates_.size())};
  }
  // Allowed ids at decoding step 1, 2 or 3.
  IdRange mask(int step) const;

  std::optional<int> find_entity(std::string_view symbol) const;
  std::optional<int> find_predicate(std::string_view symbol) const;
  bool is_entity(int id) const { return entity_range().contains(id); }
  bool is_predicate(int id) const { return predicate_range().contains(id); }
  // Symbol for any non-BOS id.
  const std::string& symbol(int id) const;

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& predicates() const { return predicates_; }

  bool operator==(const TripleVocab& other) const {
    return entities_ == other.entities_ && predicates_ == other.predicates_;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> predicates_;
  std::unordered_map<std::string, int> entity_index_;
  std::unordered_map<std::string, int> predicate_index_;
};

using TripleIds = std::array<int, 3>;

// Tokens with frequency >= min_count, ordered by descending frequency then
// lexicographically, after the reserved symbols.
WordVocab build_word_vocab(std::span<const std::vector<std::string>> corpus,
                           std::size_t min_count);

// Entities are the union of subjects and objects; symbols sorted.
TripleVocab build_kg_vocab(std::span<const Triple> triples);

std::vector<int> encode_sentence(std::span<const std::string> tokens, const WordVocab& vocab);

// nullopt if any slot is outside the vocabulary.
std::optional<TripleIds> encode_triple(const Triple& triple, const TripleVocab& vocab);

// Throws seq2rdf::Error when an id sits in the wrong partition.
Triple decode_triple(const TripleIds& ids, const TripleVocab& vocab);

// One symbol per line, line number = id offset.
void save_symbols(const std::filesystem::path& path, std::span<const std::string> symbols);
std::vector<std::string> load_symbols(const std::filesystem::path& path);

void save_vocabs(const std::filesystem::path& dir, const WordVocab& words,
                 const TripleVocab& triples);
WordVocab load_word_vocab(const std::filesystem::path& dir);
TripleVocab load_triple_vocab(const std::filesystem::path& dir);

}  // namespace seq2rdf
