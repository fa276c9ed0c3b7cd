#include "seq2rdf/eval.hpp"

#include <algorithm>
#include <cstdio>

#include "seq2rdf/error.hpp"

namespace seq2rdf {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kOovEntity:
      return "OOV_ENTITY";
    case ErrorCategory::kOovPredicate:
      return "OOV_PREDICATE";
    case ErrorCategory::kOverlappingRelation:
      return "OVERLAPPING_RELATION";
    case ErrorCategory::kWrongSubject:
      return "WRONG_SUBJECT";
    case ErrorCategory::kWrongPredicate:
      return "WRONG_PREDICATE";
    case ErrorCategory::kWrongObject:
      return "WRONG_OBJECT";
    case ErrorCategory::kMultipleWrong:
      return "MULTIPLE_WRONG";
  }
  return "UNKNOWN";
}

bool exact_match(const Triple& pred, const Triple& gold) {
  return pred.subject == gold.subject && pred.predicate == gold.predicate &&
         pred.object == gold.object;
}

EvalReport evaluate(std::span<const std::optional<Triple>> preds, std::span<const Triple> golds) {
  if (preds.size() != golds.size()) {
    throw Error("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                std::to_string(golds.size()) + " gold triples");
  }
  EvalReport r;
  r.n_gold = golds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i]) continue;
    ++r.n_predicted;
    r.n_correct += exact_match(*preds[i], golds[i]);
  }
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  r.precision = ratio(r.n_correct, r.n_predicted);
  r.recall = ratio(r.n_correct, r.n_gold);
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

OverlapIndex::OverlapIndex(std::span<const Triple> kg) {
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> seen;
  for (const auto& t : kg) {
    auto key = std::minmax(t.subject, t.object);
    auto& preds = seen[{key.first, key.second}];
    if (std::find(preds.begin(), preds.end(), t.predicate) == preds.end()) {
      preds.push_back(t.predicate);
    }
  }
  for (const auto& [key, preds] : seen) pair_counts_[key] = preds.size();
}

std::size_t OverlapIndex::relations_between(const std::string& a, const std::string& b) const {
  auto key = std::minmax(a, b);
  auto it = pair_counts_.find({key.first, key.second});
  return it == pair_counts_.end() ? 0 : it->second;
}

ErrorCategory classify_error(const std::optional<Triple>& pred, const Triple& gold,
                             const TripleVocab& vocab, const OverlapIndex& overlaps) {
  if (!vocab.find_entity(gold.subject) || !vocab.find_entity(gold.object)) {
    return ErrorCategory::kOovEntity;
  }
  if (!vocab.find_predicate(gold.predicate)) return ErrorCategory::kOovPredicate;
  if (overlaps.relations_between(gold.subject, gold.object) > 1) {
    return ErrorCategory::kOverlappingRelation;
  }
  if (!pred) return ErrorCategory::kMultipleWrong;
  const bool s = pred->subject != gold.subject;
  const bool p = pred->predicate != gold.predicate;
  const bool o = pred->object != gold.object;
  if (s + p + o > 1) return ErrorCategory::kMultipleWrong;
  if (s) return ErrorCategory::kWrongSubject;
  if (p) return ErrorCategory::kWrongPredicate;
  return ErrorCategory::kWrongObject;
}

ErrorCounts error_taxonomy(std::span<const std::optional<Triple>> preds,
                           std::span<const Triple> golds, const TripleVocab& vocab,
                           std::span<const Triple> kg) {
  if (preds.size() != golds.size()) throw Error("error_taxonomy: misaligned inputs");
  const OverlapIndex overlaps(kg);
  ErrorCounts counts;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] && exact_match(*preds[i], golds[i])) continue;
    ++counts[classify_error(preds[i], golds[i], vocab, overlaps)];
  }
  return counts;
}

std::string format_report_table(const EvalReport& report) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "gold       %zu\npredicted  %zu\ncorrect    %zu\n"
                "precision  %.6f\nrecall     %.6f\nF1         %.6f\n",
                report.n_gold, report.n_predicted, report.n_correct, report.precision,
                report.recall, report.f1);
  out += buf;
  if (!report.error_counts.empty()) {
    out += "errors:\n";
    for (auto c : kAllErrorCategories) {
      auto it = report.error_counts.find(c);
      std::snprintf(buf, sizeof buf, "  %-22s %zu\n", std::string(category_name(c)).c_str(),
                    it == report.error_counts.end() ? std::size_t{0} : it->second);
      out += buf;
    }
  }
  return out;
}

std::string format_report_records(const EvalReport& report) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "n_gold=%zu\nn_predicted=%zu\nn_correct=%zu\nprecision=%.9f\nrecall=%.9f\n"
                "f1=%.9f\n",
                report.n_gold, report.n_predicted, report.n_correct, report.precision,
                report.recall, report.f1);
  out += buf;
  for (auto c : kAllErrorCategories) {
    auto it = report.error_counts.find(c);
    std::snprintf(buf, sizeof buf, "error.%s=%zu\n", std::string(category_name(c)).c_str(),
                  it == report.error_counts.end() ? std::size_t{0} : it->second);
    out += buf;
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string format_ablation_grid(const AblationGrid& grid) {
  std::size_t label_width = 8;
  for (const auto& r : grid.rows) label_width = std::max(label_width, r.size());
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label_width), "Config");
  out += buf;
  for (const auto& c : grid.columns) {
    std::snprintf(buf, sizeof buf, "  %14s", c.c_str());
    out += buf;
  }
  out += "\n";
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label_width), grid.rows[r].c_str());
    out += buf;
    for (const auto& cell : grid.cells[r]) {
      std::snprintf(buf, sizeof buf, "  %14.1f", 100.0 * cell.median);
      out += buf;
    }
    out += "\n";
  }
  out += "per-seed F1 (x100):\n";
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    for (std::size_t c = 0; c < grid.columns.size(); ++c) {
      out += "  " + grid.rows[r] + " / " + grid.columns[c] + ":";
      for (double v : grid.cells[r][c].per_seed) {
        std::snprintf(buf, sizeof buf, " %.1f", 100.0 * v);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace seq2rdf
