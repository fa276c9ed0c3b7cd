#include "seq2rdf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "seq2rdf/error.hpp"
#include "seq2rdf/parallel.hpp"
#include "seq2rdf/text.hpp"

namespace seq2rdf {

using nlohmann::json;

void KnowledgeGraph::add_triple(const Triple& triple) {
  if (!triple.valid()) throw Error("KG triple with an empty symbol");
  auto it = std::lower_bound(triples_.begin(), triples_.end(), triple);
  if (it != triples_.end() && *it == triple) return;
  triples_.insert(it, triple);
}

void KnowledgeGraph::add_alias(const std::string& entity, const std::string& alias) {
  add_alias_tokens(entity, tokenize(alias));
}

void KnowledgeGraph::add_alias_tokens(const std::string& entity, Alias alias) {
  if (entity.empty()) throw Error("alias for an empty entity symbol");
  if (alias.empty()) throw Error("empty alias for entity '" + entity + "'");
  for (auto& tok : alias) tok = to_lower_ascii(tok);
  auto& list = surface_forms_[entity];
  if (std::find(list.begin(), list.end(), alias) == list.end()) list.push_back(std::move(alias));
}

void KnowledgeGraph::add_default_aliases() {
  for (const auto& e : entities()) {
    if (surface_forms_.count(e) != 0) continue;
    auto tokens = tokenize(local_name(e));
    if (!tokens.empty()) add_alias_tokens(e, std::move(tokens));
  }
}

std::vector<std::string> KnowledgeGraph::entities() const {
  std::set<std::string> out;
  for (const auto& t : triples_) {
    out.insert(t.subject);
    out.insert(t.object);
  }
  return {out.begin(), out.end()};
}

bool KnowledgeGraph::contains(const Triple& triple) const {
  return std::binary_search(triples_.begin(), triples_.end(), triple);
}

std::string local_name(const std::string& symbol) {
  std::string name = symbol;
  if (auto pos = name.find_last_of(":/#"); pos != std::string::npos) name = name.substr(pos + 1);
  std::replace(name.begin(), name.end(), '_', ' ');
  return name;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

std::string where(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::vector<Triple> load_kg_triples(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Triple> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw Error(where(path.string(), n) + "expected 3 tab-separated fields, got " +
                  std::to_string(fields.size()));
    }
    Triple t{fields[0], fields[1], fields[2]};
    if (!t.valid()) throw Error(where(path.string(), n) + "empty triple field");
    out.push_back(std::move(t));
  }
  return out;
}

void save_kg_triples(const std::filesystem::path& path, std::span<const Triple> triples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : triples) out << t.subject << '\t' << t.predicate << '\t' << t.object << '\n';
}

void load_surface_forms(const std::filesystem::path& path, KnowledgeGraph& kg) {
  auto in = open_input(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw Error(where(path.string(), n) + "expected entity<TAB>alias");
    }
    auto tokens = tokenize(fields[1]);
    if (fields[0].empty() || tokens.empty()) {
      throw Error(where(path.string(), n) + "empty entity or alias");
    }
    kg.add_alias_tokens(fields[0], std::move(tokens));
  }
}

KnowledgeGraph load_knowledge_graph(const std::filesystem::path& kg_path,
                                    const std::filesystem::path& surface_forms_path) {
  KnowledgeGraph kg;
  for (const auto& t : load_kg_triples(kg_path)) kg.add_triple(t);
  if (!surface_forms_path.empty()) load_surface_forms(surface_forms_path, kg);
  return kg;
}

namespace {

struct ParsedRecord {
  AnnotatedExample example;
  std::string split;
};

ParsedRecord parse_record(const std::string& line, const std::string& origin, std::size_t n) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(where(origin, n) + "malformed record: " + e.what());
  }
  if (!j.is_object()) throw Error(where(origin, n) + "record is not an object");
  if (!j.contains("tokens") || !j["tokens"].is_array()) {
    throw Error(where(origin, n) + "missing field 'tokens' (array of strings)");
  }
  if (!j.contains("triple") || !j["triple"].is_array()) {
    throw Error(where(origin, n) + "missing field 'triple' (array of 3 strings)");
  }
  ParsedRecord rec;
  for (const auto& tok : j["tokens"]) {
    if (!tok.is_string()) throw Error(where(origin, n) + "'tokens' must hold strings");
    rec.example.tokens.push_back(tok.get<std::string>());
  }
  if (rec.example.tokens.empty()) throw Error(where(origin, n) + "'tokens' is empty");
  const auto& tr = j["triple"];
  if (tr.size() != 3) {
    throw Error(where(origin, n) + "'triple' must have exactly 3 elements, got " +
                std::to_string(tr.size()));
  }
  for (const auto& s : tr) {
    if (!s.is_string() || s.get<std::string>().empty()) {
      throw Error(where(origin, n) + "'triple' elements must be non-empty strings");
    }
  }
  rec.example.gold = {tr[0].get<std::string>(), tr[1].get<std::string>(),
                      tr[2].get<std::string>()};
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw Error(where(origin, n) + "'id' must be a string");
    rec.example.source_id = j["id"].get<std::string>();
  } else {
    rec.example.source_id = "line-" + std::to_string(n);
  }
  if (j.contains("split")) {
    if (!j["split"].is_string()) throw Error(where(origin, n) + "'split' must be a string");
    rec.split = j["split"].get<std::string>();
    if (rec.split != "train" && rec.split != "dev" && rec.split != "test") {
      throw Error(where(origin, n) + "unknown split '" + rec.split + "'");
    }
  }
  return rec;
}

std::vector<ParsedRecord> parse_records(std::istream& in, const std::string& origin) {
  std::vector<ParsedRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    out.push_back(parse_record(line, origin, n));
  }
  return out;
}

}  // namespace

std::vector<AnnotatedExample> parse_examples(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::vector<AnnotatedExample> out;
  for (auto& rec : parse_records(in, origin)) out.push_back(std::move(rec.example));
  return out;
}

std::vector<AnnotatedExample> load_examples(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<AnnotatedExample> out;
  for (auto& rec : parse_records(in, path.string())) out.push_back(std::move(rec.example));
  return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  Dataset ds;
  for (auto& rec : parse_records(in, path.string())) {
    if (rec.split == "dev") {
      ds.dev.push_back(std::move(rec.example));
    } else if (rec.split == "test") {
      ds.test.push_back(std::move(rec.example));
    } else {
      ds.train.push_back(std::move(rec.example));
    }
  }
  return ds;
}

std::string example_to_json_line(const AnnotatedExample& ex, const std::string& split) {
  json j;
  j["id"] = ex.source_id;
  j["tokens"] = ex.tokens;
  j["triple"] = {ex.gold.subject, ex.gold.predicate, ex.gold.object};
  if (!split.empty()) j["split"] = split;
  return j.dump();
}

void save_examples(const std::filesystem::path& path, std::span<const AnnotatedExample> examples,
                   const std::string& split) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& ex : examples) out << example_to_json_line(ex, split) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RawSentence> load_sentences(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<RawSentence> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    out.push_back({"s" + std::to_string(n), std::move(tokens)});
  }
  return out;
}

namespace {

struct Span {
  std::size_t start;
  std::size_t length;
  std::size_t end() const { return start + length; }
  bool overlaps(const Span& o) const { return start < o.end() && o.start < end(); }
  bool operator==(const Span&) const = default;
};

struct AliasIndex {
  // first alias token -> (alias, entity)
  std::unordered_map<std::string, std::vector<std::pair<const Alias*, const std::string*>>> by_head;
  std::map<std::pair<std::string, std::string>, std::vector<const Triple*>> by_pair;
};

AliasIndex build_index(const KnowledgeGraph& kg) {
  AliasIndex idx;
  for (const auto& [entity, aliases] : kg.surface_forms()) {
    for (const auto& alias : aliases) idx.by_head[alias.front()].push_back({&alias, &entity});
  }
  for (const auto& t : kg.triples()) idx.by_pair[{t.subject, t.object}].push_back(&t);
  return idx;
}

struct SentenceMatch {
  std::vector<const Triple*> triples;
};

SentenceMatch match_sentence(const AliasIndex& idx, const std::vector<std::string>& raw_tokens) {
  std::vector<std::string> tokens;
  tokens.reserve(raw_tokens.size());
  for (const auto& t : raw_tokens) tokens.push_back(to_lower_ascii(t));

  struct Candidate {
    Span span;
    const std::string* entity;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = idx.by_head.find(tokens[i]);
    if (it == idx.by_head.end()) continue;
    for (const auto& [alias, entity] : it->second) {
      if (i + alias->size() > tokens.size()) continue;
      if (std::equal(alias->begin(), alias->end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        candidates.push_back({{i, alias->size()}, entity});
      }
    }
  }
  // Longest alias first; an accepted span blocks any other span overlapping it
  // unless both cover exactly the same tokens (a shared alias).
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.span.length != b.span.length) return a.span.length > b.span.length;
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return *a.entity < *b.entity;
  });
  std::vector<Candidate> accepted;
  for (const auto& c : candidates) {
    bool blocked = false;
    for (const auto& a : accepted) {
      if (a.span.overlaps(c.span) && !(a.span == c.span)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) accepted.push_back(c);
  }

  std::map<std::string, std::vector<Span>> spans;
  for (const auto& a : accepted) spans[*a.entity].push_back(a.span);

  SentenceMatch match;
  for (const auto& [head, head_spans] : spans) {
    for (const auto& [tail, tail_spans] : spans) {
      auto it = idx.by_pair.find({head, tail});
      if (it == idx.by_pair.end()) continue;
      bool disjoint = false;
      for (const auto& hs : head_spans) {
        for (const auto& ts : tail_spans) disjoint = disjoint || !hs.overlaps(ts);
      }
      if (!disjoint) continue;
      match.triples.insert(match.triples.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(match.triples.begin(), match.triples.end(),
            [](const Triple* a, const Triple* b) { return *a < *b; });
  return match;
}

}  // namespace

AlignmentResult distant_supervise(const KnowledgeGraph& kg, std::span<const RawSentence> sentences,
                                  const AlignOptions& options) {
  const AliasIndex idx = build_index(kg);
  std::vector<SentenceMatch> matches(sentences.size());
  parallel_for(sentences.size(), options.threads,
               [&](std::size_t i) { matches[i] = match_sentence(idx, sentences[i].tokens); });

  AlignmentResult result;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& found = matches[i].triples;
    const auto& s = sentences[i];
    if (found.empty()) {
      ++result.unmatched;
      continue;
    }
    if (found.size() == 1) {
      result.examples.push_back({s.tokens, *found.front(), s.source_id});
      continue;
    }
    for (const Triple* t : found) {
      result.ambiguous.push_back({s.source_id, s.tokens, *t});
      if (options.keep_ambiguous) result.examples.push_back({s.tokens, *t, s.source_id});
    }
  }
  return result;
}

namespace {

// Groups example indices by source_id in order of first appearance.
std::vector<std::vector<std::size_t>> group_by_source(std::span<const AnnotatedExample> examples) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto [it, inserted] = slot.emplace(examples[i].source_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

void append_group(std::vector<AnnotatedExample>& out, std::span<const AnnotatedExample> examples,
                  const std::vector<std::size_t>& group) {
  for (std::size_t i : group) out.push_back(examples[i]);
}

}  // namespace

Dataset split_dataset(std::span<const AnnotatedExample> examples, std::array<double, 3> ratios,
                      SeededRng& rng) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw Error("split ratios must be positive");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("split ratios must sum to 1");

  auto groups = group_by_source(examples);
  rng.shuffle(groups);
  const double n = static_cast<double>(groups.size());
  const auto n_train = static_cast<std::size_t>(std::floor(ratios[0] * n + 1e-9));
  const auto n_dev = std::min(groups.size() - n_train,
                              static_cast<std::size_t>(std::floor(ratios[1] * n + 1e-9)));
  Dataset ds;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& target = g < n_train ? ds.train : (g < n_train + n_dev ? ds.dev : ds.test);
    append_group(target, examples, groups[g]);
  }
  return ds;
}

std::vector<std::vector<AnnotatedExample>> make_folds(std::span<const AnnotatedExample> examples,
                                                      std::size_t k, SeededRng& rng) {
  if (k < 1) throw Error("fold count must be at least 1");
  auto groups = group_by_source(examples);
  if (groups.size() < k) {
    throw Error("cannot make " + std::to_string(k) + " folds from " +
                std::to_string(groups.size()) + " examples");
  }
  rng.shuffle(groups);
  std::vector<std::vector<AnnotatedExample>> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = groups.size() * f / k;
    const std::size_t end = groups.size() * (f + 1) / k;
    for (std::size_t g = begin; g < end; ++g) append_group(folds[f], examples, groups[g]);
  }
  return folds;
}

}  // namespace seq2rdf
