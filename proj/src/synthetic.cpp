#include "seq2rdf/synthetic.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "seq2rdf/error.hpp"
#include "seq2rdf/text.hpp"

namespace seq2rdf {
namespace {

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string render(const std::string& pattern, const std::string& subject,
                   const std::string& trigger, const std::string& object) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{' && i + 2 < pattern.size() && pattern[i + 2] == '}') {
      const char slot = pattern[i + 1];
      out += slot == 's' ? subject : (slot == 't' ? trigger : object);
      i += 2;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

// Random vectors for every token in `tokens`, overridden by `fixed`.
VectorFile make_vectors(const std::set<std::string>& tokens,
                        const std::map<std::string, Vec>& fixed, std::size_t dim,
                        SeededRng& rng) {
  VectorFile file;
  file.tokens.assign(tokens.begin(), tokens.end());
  file.vectors = Tensor2(file.tokens.size(), dim);
  for (std::size_t r = 0; r < file.tokens.size(); ++r) {
    auto row = file.vectors.row(r);
    for (double& v : row) v = rng.uniform(-0.5, 0.5);
    if (auto it = fixed.find(file.tokens[r]); it != fixed.end()) {
      std::copy(it->second.begin(), it->second.end(), row.begin());
    }
  }
  return file;
}

}  // namespace

AnnotatedExample capital_example() {
  return {tokenize("Berlin is the capital city of Germany."),
          {"dbr:Germany", "dbo:capital", "dbr:Berlin"},
          "capital-example"};
}

SyntheticCorpus make_memorization_corpus(const MemorizationOptions& options) {
  static const std::vector<std::string> kNames{
      "aldor", "brenn",  "corvia", "dunmore", "elstow", "farrow", "galen",  "harlow",
      "ingram", "jessop", "kelby", "lorne",   "marden", "norwick", "orrin", "pellam"};
  struct Relation {
    std::string symbol;
    std::vector<std::string> patterns;
  };
  static const std::vector<Relation> kRelations{
      {"rel:capital_of", {"{s} is the capital of {o}", "the capital of {o} is {s}"}},
      {"rel:located_in", {"{s} is located in {o}", "{s} lies within {o}"}},
      {"rel:borders", {"{s} borders {o}", "{s} shares a border with {o}"}},
      {"rel:twinned_with", {"{s} is twinned with {o}", "{s} has a twin town called {o}"}},
      {"rel:trades_with", {"{s} trades with {o}", "merchants of {s} sell goods to {o}"}},
      {"rel:founded_by", {"{s} was founded by settlers from {o}", "settlers from {o} founded {s}"}},
  };
  if (options.entities < 2 || options.entities > kNames.size()) {
    throw Error("memorization corpus supports 2.." + std::to_string(kNames.size()) + " entities");
  }
  if (options.predicates < 1 || options.predicates > kRelations.size()) {
    throw Error("memorization corpus supports 1.." + std::to_string(kRelations.size()) +
                " predicates");
  }
  const std::size_t capacity = options.entities * (options.entities - 1) * options.predicates;
  if (options.sentences > capacity) throw Error("more sentences requested than distinct triples");

  SeededRng rng(options.seed);
  SyntheticCorpus corpus;
  std::set<Triple> used;
  std::set<std::string> vocab;
  while (corpus.dataset.train.size() < options.sentences) {
    const auto s = rng.index(options.entities);
    const auto o = rng.index(options.entities);
    const auto p = rng.index(options.predicates);
    if (s == o) continue;
    Triple t{"ent:" + capitalize(kNames[s]), kRelations[p].symbol, "ent:" + capitalize(kNames[o])};
    if (!used.insert(t).second) continue;
    const auto& pattern = kRelations[p].patterns[rng.index(kRelations[p].patterns.size())];
    AnnotatedExample ex{tokenize(render(pattern, kNames[s], "", kNames[o])), t,
                        "mem-" + std::to_string(corpus.dataset.train.size())};
    vocab.insert(ex.tokens.begin(), ex.tokens.end());
    corpus.dataset.train.push_back(std::move(ex));
  }
  corpus.kg.assign(used.begin(), used.end());
  for (std::size_t e = 0; e < options.entities; ++e) {
    corpus.surface_forms.emplace_back("ent:" + capitalize(kNames[e]), kNames[e]);
  }
  corpus.word_vectors = make_vectors(vocab, {}, options.word_dim, rng);
  return corpus;
}

SyntheticCorpus make_ablation_corpus(const AblationCorpusOptions& options) {
  static const std::vector<std::string> kPrefixes{"north", "south", "east", "west",
                                                  "upper", "lower", "old",  "new"};
  static const std::vector<std::string> kSuffixes{"haven", "ridge", "field", "port",
                                                  "ford",  "dale",  "brook", "wick"};
  struct Relation {
    std::string symbol;
    std::vector<std::string> triggers;
    std::vector<std::string> content_words;
  };
  static const std::vector<Relation> kRelations{
      {"rel:located_in",
       {"is located in", "lies in", "is situated in", "sits in"},
       {"located", "lies", "situated", "sits"}},
      {"rel:borders", {"borders", "adjoins", "neighbours", "abuts"},
       {"borders", "adjoins", "neighbours", "abuts"}},
      {"rel:capital_of",
       {"is the capital of", "is the seat of", "governs", "administers"},
       {"capital", "seat", "governs", "administers"}},
      {"rel:twinned_with",
       {"is twinned with", "is partnered with", "is paired with", "is allied with"},
       {"twinned", "partnered", "paired", "allied"}},
      {"rel:trades_with", {"trades with", "exports to", "ships goods to", "sells to"},
       {"trades", "exports", "ships", "goods", "sells"}},
  };
  static const std::vector<std::string> kPatterns{
      "{s} {t} {o}",
      "{s} {t} {o} according to records",
      "records show that {s} {t} {o}",
      "it is said that {s} {t} {o}",
      "since long ago {s} {t} {o}",
  };
  const std::size_t max_entities = kPrefixes.size() * kSuffixes.size();
  if (options.entities < 2 || options.entities > max_entities) {
    throw Error("ablation corpus supports 2.." + std::to_string(max_entities) + " entities");
  }
  if (options.kg_triples > options.entities * (options.entities - 1) / 2) {
    throw Error("more KG triples requested than entity pairs");
  }

  SeededRng rng(options.seed);
  std::vector<std::pair<std::size_t, std::size_t>> names;
  for (std::size_t a = 0; a < kPrefixes.size(); ++a) {
    for (std::size_t b = 0; b < kSuffixes.size(); ++b) names.emplace_back(a, b);
  }
  rng.shuffle(names);
  names.resize(options.entities);
  std::vector<std::string> surface;
  std::vector<std::string> symbols;
  for (auto [a, b] : names) {
    surface.push_back(kPrefixes[a] + " " + kSuffixes[b]);
    symbols.push_back("ex:" + capitalize(kPrefixes[a]) + "_" + capitalize(kSuffixes[b]));
  }

  SyntheticCorpus corpus;
  // One relation per unordered entity pair keeps sentences unambiguous.
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> triple_relation;
  std::vector<std::pair<std::size_t, std::size_t>> triple_pair;
  while (triple_pair.size() < options.kg_triples) {
    const auto s = rng.index(options.entities);
    const auto o = rng.index(options.entities);
    if (s == o || !pairs.insert({std::min(s, o), std::max(s, o)}).second) continue;
    triple_pair.emplace_back(s, o);
    triple_relation.push_back(rng.index(kRelations.size()));
  }
  for (std::size_t i = 0; i < triple_pair.size(); ++i) {
    corpus.kg.push_back({symbols[triple_pair[i].first], kRelations[triple_relation[i]].symbol,
                         symbols[triple_pair[i].second]});
  }

  // 70% of the KG is expressed in training text; the rest only appears at test.
  std::vector<std::size_t> order(triple_pair.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const std::size_t n_seen = std::max<std::size_t>(1, order.size() * 7 / 10);
  const std::vector<std::size_t> seen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_seen));
  const std::vector<std::size_t> unseen(order.begin() + static_cast<std::ptrdiff_t>(n_seen), order.end());

  std::set<std::string> vocab;
  std::size_t counter = 0;
  auto make_sentence = [&](std::size_t triple, bool common_phrasing) {
    const auto& rel = kRelations[triple_relation[triple]];
    const std::size_t trigger = common_phrasing && rng.uniform() < 0.9
                                    ? rng.index(2)
                                    : rng.index(rel.triggers.size());
    const auto& pattern = kPatterns[rng.index(kPatterns.size())];
    AnnotatedExample ex{tokenize(render(pattern, surface[triple_pair[triple].first],
                                        rel.triggers[trigger], surface[triple_pair[triple].second])),
                        corpus.kg[triple], "abl-" + std::to_string(counter++)};
    vocab.insert(ex.tokens.begin(), ex.tokens.end());
    return ex;
  };
  for (std::size_t i = 0; i < options.train_sentences; ++i) {
    corpus.dataset.train.push_back(make_sentence(seen[rng.index(seen.size())], true));
  }
  for (std::size_t i = 0; i < options.dev_sentences; ++i) {
    corpus.dataset.dev.push_back(make_sentence(seen[rng.index(seen.size())], true));
  }
  for (std::size_t i = 0; i < options.test_sentences; ++i) {
    const bool held_out = !unseen.empty() && rng.coin();
    const auto& pool = held_out ? unseen : seen;
    corpus.dataset.test.push_back(make_sentence(pool[rng.index(pool.size())], false));
  }

  for (std::size_t e = 0; e < symbols.size(); ++e) corpus.surface_forms.emplace_back(symbols[e], surface[e]);

  std::map<std::string, Vec> fixed;
  for (const auto& rel : kRelations) {
    Vec prototype(options.word_dim);
    for (double& v : prototype) v = rng.uniform(-0.5, 0.5);
    for (const auto& word : rel.content_words) {
      Vec vec = prototype;
      for (double& v : vec) v += rng.uniform(-0.1, 0.1);
      fixed[word] = std::move(vec);
      vocab.insert(word);
    }
  }
  corpus.word_vectors = make_vectors(vocab, fixed, options.word_dim, rng);
  return corpus;
}

}  // namespace seq2rdf
