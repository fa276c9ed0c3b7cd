#include "seq2rdf/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "seq2rdf/error.hpp"

namespace seq2rdf {

WordVocab::WordVocab() {
  for (auto s : kReserved) add(std::string(s));
}

WordVocab WordVocab::from_symbols(std::vector<std::string> symbols) {
  if (symbols.size() < kReserved.size()) {
    throw Error("word vocabulary must start with the reserved symbols <pad> <unk> <bos>");
  }
  for (std::size_t i = 0; i < kReserved.size(); ++i) {
    if (symbols[i] != kReserved[i]) {
      throw Error("word vocabulary line " + std::to_string(i + 1) + " must be " +
                  std::string(kReserved[i]));
    }
  }
  WordVocab vocab;
  for (std::size_t i = kReserved.size(); i < symbols.size(); ++i) {
    if (vocab.contains(symbols[i])) throw Error("duplicate word symbol '" + symbols[i] + "'");
    vocab.add(symbols[i]);
  }
  return vocab;
}

int WordVocab::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  symbols_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<int> WordVocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int WordVocab::id(std::string_view token) const { return find(token).value_or(kUnk); }

const std::string& WordVocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw Error("word id " + std::to_string(id) + " out of range");
  }
  return symbols_[static_cast<std::size_t>(id)];
}

TripleVocab::TripleVocab(std::vector<std::string> entities, std::vector<std::string> predicates)
    : entities_(std::move(entities)), predicates_(std::move(predicates)) {
  const int ebase = 1;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i].empty()) throw Error("empty entity symbol");
    if (!entity_index_.emplace(entities_[i], ebase + static_cast<int>(i)).second) {
      throw Error("duplicate entity symbol '" + entities_[i] + "'");
    }
  }
  const int pbase = 1 + static_cast<int>(entities_.size());
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    if (predicates_[i].empty()) throw Error("empty predicate symbol");
    if (!predicate_index_.emplace(predicates_[i], pbase + static_cast<int>(i)).second) {
      throw Error("duplicate predicate symbol '" + predicates_[i] + "'");
    }
  }
}

IdRange TripleVocab::mask(int step) const {
  switch (step) {
    case 1:
    case 3:
      return entity_range();
    case 2:
      return predicate_range();
    default:
      throw Error("decoding step must be 1, 2 or 3, got " + std::to_string(step));
  }
}

std::optional<int> TripleVocab::find_entity(std::string_view symbol) const {
  auto it = entity_index_.find(std::string(symbol));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> TripleVocab::find_predicate(std::string_view symbol) const {
  auto it = predicate_index_.find(std::string(symbol));
  if (it == predicate_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& TripleVocab::symbol(int id) const {
  if (is_entity(id)) return entities_[static_cast<std::size_t>(id - 1)];
  if (is_predicate(id)) return predicates_[static_cast<std::size_t>(id - predicate_range().begin)];
  throw Error("target id " + std::to_string(id) + " has no symbol");
}

WordVocab build_word_vocab(std::span<const std::vector<std::string>> corpus,
                           std::size_t min_count) {
  if (min_count < 1) throw Error("min_count must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n < min_count) continue;
    bool reserved = false;
    for (auto r : WordVocab::kReserved) reserved = reserved || tok == r;
    if (!reserved) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  WordVocab vocab;
  for (const auto& [tok, n] : kept) vocab.add(tok);
  return vocab;
}

TripleVocab build_kg_vocab(std::span<const Triple> triples) {
  if (triples.empty()) throw Error("cannot build a KG vocabulary from an empty triple set");
  std::set<std::string> entities;
  std::set<std::string> predicates;
  for (const auto& t : triples) {
    if (!t.valid()) throw Error("triple with an empty symbol");
    entities.insert(t.subject);
    entities.insert(t.object);
    predicates.insert(t.predicate);
  }
  return TripleVocab({entities.begin(), entities.end()}, {predicates.begin(), predicates.end()});
}

std::vector<int> encode_sentence(std::span<const std::string> tokens, const WordVocab& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(vocab.id(tok));
  return ids;
}

std::optional<TripleIds> encode_triple(const Triple& triple, const TripleVocab& vocab) {
  auto s = vocab.find_entity(triple.subject);
  auto p = vocab.find_predicate(triple.predicate);
  auto o = vocab.find_entity(triple.object);
  if (!s || !p || !o) return std::nullopt;
  return TripleIds{*s, *p, *o};
}

Triple decode_triple(const TripleIds& ids, const TripleVocab& vocab) {
  static constexpr std::array<const char*, 3> kSlot{"subject", "predicate", "object"};
  for (int slot = 0; slot < 3; ++slot) {
    if (!vocab.mask(slot + 1).contains(ids[static_cast<std::size_t>(slot)])) {
      throw Error(std::string("partition violation: ") + kSlot[static_cast<std::size_t>(slot)] +
                  " slot holds target id " + std::to_string(ids[static_cast<std::size_t>(slot)]));
    }
  }
  return {vocab.symbol(ids[0]), vocab.symbol(ids[1]), vocab.symbol(ids[2])};
}

void save_symbols(const std::filesystem::path& path, std::span<const std::string> symbols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : symbols) {
    if (s.find('\n') != std::string::npos) throw Error("symbol contains a newline: " + s);
    out << s << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> load_symbols(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

void save_vocabs(const std::filesystem::path& dir, const WordVocab& words,
                 const TripleVocab& triples) {
  std::filesystem::create_directories(dir);
  save_symbols(dir / "words.txt", words.symbols());
  save_symbols(dir / "entities.txt", triples.entities());
  save_symbols(dir / "predicates.txt", triples.predicates());
}

WordVocab load_word_vocab(const std::filesystem::path& dir) {
  return WordVocab::from_symbols(load_symbols(dir / "words.txt"));
}

TripleVocab load_triple_vocab(const std::filesystem::path& dir) {
  return TripleVocab(load_symbols(dir / "entities.txt"), load_symbols(dir / "predicates.txt"));
}

}  // namespace seq2rdf
