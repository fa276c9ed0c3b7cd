#include "seq2rdf/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "seq2rdf/error.hpp"
#include "seq2rdf/log.hpp"
#include "seq2rdf/numerics/ops.hpp"
#include "seq2rdf/text.hpp"

namespace seq2rdf {

std::string_view norm_name(NormKind norm) { return norm == NormKind::kL1 ? "L1" : "L2"; }

NormKind parse_norm(std::string_view name) {
  const auto lower = to_lower_ascii(name);
  if (lower == "l1") return NormKind::kL1;
  if (lower == "l2") return NormKind::kL2;
  throw Error("unknown norm '" + std::string(name) + "' (expected L1 or L2)");
}

double transe_score(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t, NormKind norm) {
  if (h.size() != r.size() || h.size() != t.size()) {
    throw Error("transe_score: dimension mismatch " + std::to_string(h.size()) + "/" +
                std::to_string(r.size()) + "/" + std::to_string(t.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double d = h[i] + r[i] - t[i];
    acc += norm == NormKind::kL1 ? std::abs(d) : d * d;
  }
  return norm == NormKind::kL1 ? acc : std::sqrt(acc);
}

void TransEConfig::validate() const {
  if (dim < 1) throw Error("TransE dimension must be at least 1");
  if (!(margin > 0.0)) throw Error("TransE margin must be positive");
  if (!(lr > 0.0)) throw Error("TransE learning rate must be positive");
  if (batch_size < 1) throw Error("TransE batch size must be at least 1");
}

IndexedKg::IndexedKg(std::span<const Triple> triples) {
  std::set<std::string> ents;
  std::set<std::string> rels;
  for (const auto& t : triples) {
    ents.insert(t.subject);
    ents.insert(t.object);
    rels.insert(t.predicate);
  }
  entities_.assign(ents.begin(), ents.end());
  relations_.assign(rels.begin(), rels.end());
  for (std::size_t i = 0; i < entities_.size(); ++i) entity_index_[entities_[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    relation_index_[relations_[i]] = static_cast<int>(i);
  }
  for (const auto& t : triples) {
    IndexedTriple it{entity_index_.at(t.subject), relation_index_.at(t.predicate),
                     entity_index_.at(t.object)};
    if (members_.insert(it).second) triples_.push_back(it);
  }
}

std::optional<int> IndexedKg::entity(std::string_view symbol) const {
  auto it = entity_index_.find(std::string(symbol));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> IndexedKg::relation(std::string_view symbol) const {
  auto it = relation_index_.find(std::string(symbol));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

IndexedTriple negative_sample(const IndexedTriple& positive, const IndexedKg& kg, SeededRng& rng) {
  const std::size_t n = kg.entities().size();
  if (n < 2) throw Error("negative sampling needs at least 2 entities");
  const bool replace_head = rng.coin();
  auto corrupt = [&](bool head, int e) {
    IndexedTriple c = positive;
    (head ? c.head : c.tail) = e;
    return c;
  };
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto c = corrupt(replace_head, static_cast<int>(rng.index(n)));
    if (!kg.contains(c)) return c;
  }
  // Dense neighbourhood: draw uniformly among the valid corruptions of the
  // chosen side, falling back to the other side.
  for (bool head : {replace_head, !replace_head}) {
    std::vector<IndexedTriple> valid;
    for (std::size_t e = 0; e < n; ++e) {
      auto c = corrupt(head, static_cast<int>(e));
      if (!kg.contains(c)) valid.push_back(c);
    }
    if (!valid.empty()) return valid[rng.index(valid.size())];
  }
  throw Error("no valid corruption exists for a triple of relation '" +
              kg.relations()[static_cast<std::size_t>(positive.relation)] + "'");
}

std::optional<std::size_t> KgEmbeddings::entity_row(std::string_view symbol) const {
  auto it = std::find(entities.begin(), entities.end(), symbol);
  if (it == entities.end()) return std::nullopt;
  return static_cast<std::size_t>(it - entities.begin());
}

std::optional<std::size_t> KgEmbeddings::relation_row(std::string_view symbol) const {
  auto it = std::find(relations.begin(), relations.end(), symbol);
  if (it == relations.end()) return std::nullopt;
  return static_cast<std::size_t>(it - relations.begin());
}

namespace {

void normalize_row(std::span<double> row) {
  double sq = 0.0;
  for (double v : row) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > 0.0) {
    for (double& v : row) v /= norm;
  }
}

// d score / d(h + r - t)
void score_gradient(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t, NormKind norm, Vec& out) {
  out.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i] + r[i] - t[i];
  if (norm == NormKind::kL1) {
    for (double& v : out) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return;
  }
  double sq = 0.0;
  for (double v : out) sq += v * v;
  const double len = std::sqrt(sq);
  if (len == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (double& v : out) v /= len;
}

}  // namespace

KgEmbeddings transe_init(const IndexedKg& kg, const TransEConfig& config, SeededRng& rng) {
  config.validate();
  KgEmbeddings emb;
  emb.entities = kg.entities();
  emb.relations = kg.relations();
  emb.dim = config.dim;
  emb.norm = config.norm;
  emb.margin = config.margin;
  emb.seed = config.seed;
  const double bound = 6.0 / std::sqrt(static_cast<double>(config.dim));
  emb.entity_table = Tensor2(emb.entities.size(), config.dim);
  emb.relation_table = Tensor2(emb.relations.size(), config.dim);
  for (Tensor2* table : {&emb.relation_table, &emb.entity_table}) {
    for (double& v : table->values()) v = rng.uniform(-bound, bound);
    for (std::size_t r = 0; r < table->rows(); ++r) normalize_row(table->row(r));
  }
  return emb;
}

double transe_sgd_batch(KgEmbeddings& emb, std::span<const IndexedTriple> positives,
                        std::span<const IndexedTriple> negatives, const TransEConfig& config) {
  if (positives.size() != negatives.size()) {
    throw Error("transe_sgd_batch: positives and negatives must pair up");
  }
  std::map<int, Vec> entity_grad;
  std::map<int, Vec> relation_grad;
  auto accumulate = [&](std::map<int, Vec>& table, int row, const Vec& g, double sign) {
    auto [it, inserted] = table.try_emplace(row, Vec(emb.dim, 0.0));
    for (std::size_t i = 0; i < emb.dim; ++i) it->second[i] += sign * g[i];
  };
  auto h_row = [&](int e) { return std::span<const double>(emb.entity_table.row(static_cast<std::size_t>(e))); };
  auto r_row = [&](int r) { return std::span<const double>(emb.relation_table.row(static_cast<std::size_t>(r))); };

  double loss = 0.0;
  Vec g;
  for (std::size_t k = 0; k < positives.size(); ++k) {
    const auto& p = positives[k];
    const auto& n = negatives[k];
    const double pos = transe_score(h_row(p.head), r_row(p.relation), h_row(p.tail), emb.norm);
    const double neg = transe_score(h_row(n.head), r_row(n.relation), h_row(n.tail), emb.norm);
    const double hinge = config.margin + pos - neg;
    if (hinge <= 0.0) continue;
    loss += hinge;
    score_gradient(h_row(p.head), r_row(p.relation), h_row(p.tail), emb.norm, g);
    accumulate(entity_grad, p.head, g, 1.0);
    accumulate(relation_grad, p.relation, g, 1.0);
    accumulate(entity_grad, p.tail, g, -1.0);
    score_gradient(h_row(n.head), r_row(n.relation), h_row(n.tail), emb.norm, g);
    accumulate(entity_grad, n.head, g, -1.0);
    accumulate(relation_grad, n.relation, g, -1.0);
    accumulate(entity_grad, n.tail, g, 1.0);
  }
  if (!std::isfinite(loss)) throw Error("TransE loss became non-finite");

  for (const auto& [row, grad] : relation_grad) {
    axpy(-config.lr, grad, emb.relation_table.row(static_cast<std::size_t>(row)));
  }
  for (const auto& [row, grad] : entity_grad) {
    auto dst = emb.entity_table.row(static_cast<std::size_t>(row));
    axpy(-config.lr, grad, dst);
    normalize_row(dst);
  }
  return loss;
}

TransEResult transe_train(std::span<const Triple> triples, const TransEConfig& config) {
  config.validate();
  if (triples.empty()) throw Error("TransE needs a non-empty KG");
  const IndexedKg kg(triples);
  SeededRng init_rng = SeededRng(config.seed).derive(0);
  SeededRng order_rng = SeededRng(config.seed).derive(1);
  SeededRng sample_rng = SeededRng(config.seed).derive(2);

  TransEResult result;
  result.embeddings = transe_init(kg, config, init_rng);
  std::vector<IndexedTriple> order = kg.triples();
  std::vector<IndexedTriple> negatives;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const IndexedTriple> batch(order.data() + start, end - start);
      negatives.clear();
      for (const auto& p : batch) negatives.push_back(negative_sample(p, kg, sample_rng));
      epoch_loss += transe_sgd_batch(result.embeddings, batch, negatives, config);
    }
    if (!std::isfinite(epoch_loss)) {
      throw Error("TransE loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    result.epoch_losses.push_back(epoch_loss);
  }
  return result;
}

LinkPredictionReport link_prediction_eval(const KgEmbeddings& emb, std::span<const Triple> triples) {
  if (emb.entities.size() < 2) throw Error("link prediction needs at least 2 entities");
  LinkPredictionReport report;
  double rank_sum = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  auto tally = [&](std::size_t rank) {
    rank_sum += static_cast<double>(rank);
    h1 += rank <= 1;
    h3 += rank <= 3;
    h10 += rank <= 10;
    ++report.queries;
  };
  for (const auto& t : triples) {
    const auto h = emb.entity_row(t.subject);
    const auto r = emb.relation_row(t.predicate);
    const auto o = emb.entity_row(t.object);
    if (!h || !r || !o) {
      throw Error("link prediction: triple (" + t.subject + ", " + t.predicate + ", " + t.object +
                  ") has a symbol without an embedding");
    }
    const auto hv = emb.entity_table.row(*h);
    const auto rv = emb.relation_table.row(*r);
    const auto ov = emb.entity_table.row(*o);
    const double tail_true = transe_score(hv, rv, ov, emb.norm);
    const double head_true = tail_true;
    std::size_t tail_rank = 1, head_rank = 1;
    for (std::size_t e = 0; e < emb.entities.size(); ++e) {
      const auto ev = emb.entity_table.row(e);
      if (e != *o && transe_score(hv, rv, ev, emb.norm) < tail_true) ++tail_rank;
      if (e != *h && transe_score(ev, rv, ov, emb.norm) < head_true) ++head_rank;
    }
    tally(tail_rank);
    tally(head_rank);
  }
  if (report.queries > 0) {
    const double q = static_cast<double>(report.queries);
    report.mean_rank = rank_sum / q;
    report.hits_at_1 = static_cast<double>(h1) / q;
    report.hits_at_3 = static_cast<double>(h3) / q;
    report.hits_at_10 = static_cast<double>(h10) / q;
  }
  return report;
}

VectorFile read_vector_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  VectorFile out;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t n = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (first) {
      first = false;
      if (parts.size() == 2 && std::all_of(parts[0].begin(), parts[0].end(), ::isdigit) &&
          std::all_of(parts[1].begin(), parts[1].end(), ::isdigit)) {
        continue;  // "count dim" header
      }
    }
    if (parts.size() < 2) {
      throw Error(path.string() + ":" + std::to_string(n) + ": expected a token and a vector");
    }
    const std::size_t d = parts.size() - 1;
    if (dim == 0) dim = d;
    if (d != dim) {
      throw Error(path.string() + ":" + std::to_string(n) + ": vector has " + std::to_string(d) +
                  " components, expected " + std::to_string(dim));
    }
    out.tokens.push_back(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(parts[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != parts[i].size() || !std::isfinite(v)) {
        throw Error(path.string() + ":" + std::to_string(n) + ": bad number '" + parts[i] + "'");
      }
      values.push_back(v);
    }
  }
  out.vectors = Tensor2(out.tokens.size(), dim, std::move(values));
  return out;
}

void write_vector_file(const std::filesystem::path& path, std::span<const std::string> tokens,
                       const Tensor2& vectors) {
  if (tokens.size() != vectors.rows()) throw Error("write_vector_file: row count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << tokens.size() << ' ' << vectors.cols() << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    if (tokens[r].find_first_of(" \t\n") != std::string::npos) {
      throw Error("symbol '" + tokens[r] + "' contains whitespace");
    }
    out << tokens[r];
    for (double v : vectors.row(r)) out << ' ' << v;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void save_kg_embeddings(const std::filesystem::path& dir, const KgEmbeddings& emb) {
  std::filesystem::create_directories(dir);
  write_vector_file(dir / "entities.vec", emb.entities, emb.entity_table);
  write_vector_file(dir / "relations.vec", emb.relations, emb.relation_table);
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "manifest.txt").string());
  out << std::setprecision(17);
  out << "dim=" << emb.dim << '\n'
      << "norm=" << norm_name(emb.norm) << '\n'
      << "margin=" << emb.margin << '\n'
      << "seed=" << emb.seed << '\n'
      << "entities=" << emb.entities.size() << '\n'
      << "relations=" << emb.relations.size() << '\n';
}

KgEmbeddings load_kg_embeddings(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt", std::ios::binary);
  if (!in) throw IoError("cannot read " + (dir / "manifest.txt").string());
  std::map<std::string, std::string> manifest;
  for (std::string line; std::getline(in, line);) {
    auto pos = line.find('=');
    if (pos != std::string::npos) manifest[line.substr(0, pos)] = line.substr(pos + 1);
  }
  for (const char* key : {"dim", "norm", "margin", "seed"}) {
    if (manifest.count(key) == 0) throw Error("KG embedding manifest lacks '" + std::string(key) + "'");
  }
  KgEmbeddings emb;
  emb.dim = std::stoull(manifest["dim"]);
  emb.norm = parse_norm(manifest["norm"]);
  emb.margin = std::stod(manifest["margin"]);
  emb.seed = std::stoull(manifest["seed"]);
  auto ents = read_vector_file(dir / "entities.vec");
  auto rels = read_vector_file(dir / "relations.vec");
  for (const auto* f : {&ents, &rels}) {
    if (!f->tokens.empty() && f->vectors.cols() != emb.dim) {
      throw Error("KG embedding vectors do not match manifest dimension " + std::to_string(emb.dim));
    }
  }
  emb.entities = std::move(ents.tokens);
  emb.relations = std::move(rels.tokens);
  emb.entity_table = std::move(ents.vectors);
  emb.relation_table = std::move(rels.vectors);
  if (emb.entity_table.empty()) emb.entity_table = Tensor2(0, emb.dim);
  if (emb.relation_table.empty()) emb.relation_table = Tensor2(0, emb.dim);
  return emb;
}

namespace {

Tensor2 random_table(std::size_t rows, std::size_t dim, SeededRng& rng) {
  Tensor2 t(rows, dim);
  for (double& v : t.values()) v = rng.uniform(-0.08, 0.08);
  return t;
}

}  // namespace

InitTable word_table_from_vectors(const VectorFile& file, const WordVocab& vocab, std::size_t dim,
                                  SeededRng& rng) {
  if (!file.tokens.empty() && file.vectors.cols() != dim) {
    throw Error("word vectors have dimension " + std::to_string(file.vectors.cols()) +
                ", model expects " + std::to_string(dim));
  }
  InitTable out;
  out.table = random_table(vocab.size(), dim, rng);
  out.covered.assign(vocab.size(), false);
  for (std::size_t r = 0; r < file.tokens.size(); ++r) {
    const auto id = vocab.find(file.tokens[r]);
    if (!id || *id < static_cast<int>(WordVocab::kReserved.size())) continue;
    const auto row = static_cast<std::size_t>(*id);
    if (out.covered[row]) continue;
    std::copy(file.vectors.row(r).begin(), file.vectors.row(r).end(), out.table.row(row).begin());
    out.covered[row] = true;
    ++out.found;
  }
  const std::size_t regular = vocab.size() - WordVocab::kReserved.size();
  out.coverage = regular == 0 ? 0.0 : static_cast<double>(out.found) / static_cast<double>(regular);
  return out;
}

InitTable load_word_vectors(const std::filesystem::path& path, const WordVocab& vocab,
                            std::size_t dim, SeededRng& rng) {
  auto out = word_table_from_vectors(read_vector_file(path), vocab, dim, rng);
  if (out.coverage < 0.2) {
    std::ostringstream msg;
    msg << "word vectors cover only " << out.found << " of "
        << vocab.size() - WordVocab::kReserved.size()
        << " vocabulary tokens; the file may not match this vocabulary";
    log::warning(msg.str());
  }
  return out;
}

InitTable decoder_table_from_kg(const KgEmbeddings& emb, const TripleVocab& vocab, std::size_t dim,
                                SeededRng& rng) {
  if (emb.dim != dim) {
    throw Error("KG embeddings have dimension " + std::to_string(emb.dim) +
                ", decoder expects " + std::to_string(dim));
  }
  InitTable out;
  out.table = random_table(vocab.size(), dim, rng);
  out.covered.assign(vocab.size(), false);
  auto copy_row = [&](std::span<const double> src, int id) {
    std::copy(src.begin(), src.end(), out.table.row(static_cast<std::size_t>(id)).begin());
    out.covered[static_cast<std::size_t>(id)] = true;
    ++out.found;
  };
  for (std::size_t e = 0; e < emb.entities.size(); ++e) {
    if (auto id = vocab.find_entity(emb.entities[e])) copy_row(emb.entity_table.row(e), *id);
  }
  for (std::size_t r = 0; r < emb.relations.size(); ++r) {
    if (auto id = vocab.find_predicate(emb.relations[r])) copy_row(emb.relation_table.row(r), *id);
  }
  const std::size_t regular = vocab.size() - 1;
  out.coverage = regular == 0 ? 0.0 : static_cast<double>(out.found) / static_cast<double>(regular);
  return out;
}

}  // namespace seq2rdf
