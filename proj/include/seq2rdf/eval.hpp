#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seq2rdf/triple.hpp"
#include "seq2rdf/vocab.hpp"

namespace seq2rdf {

enum class ErrorCategory {
  kOovEntity,
  kOovPredicate,
  kOverlappingRelation,
  kWrongSubject,
  kWrongPredicate,
  kWrongObject,
  kMultipleWrong,
};

inline constexpr std::array<ErrorCategory, 7> kAllErrorCategories{
    ErrorCategory::kOovEntity,      ErrorCategory::kOovPredicate, ErrorCategory::kOverlappingRelation,
    ErrorCategory::kWrongSubject,   ErrorCategory::kWrongPredicate, ErrorCategory::kWrongObject,
    ErrorCategory::kMultipleWrong};

std::string_view category_name(ErrorCategory category);

using ErrorCounts = std::map<ErrorCategory, std::size_t>;

struct EvalReport {
  std::size_t n_gold = 0;
  std::size_t n_predicted = 0;
  std::size_t n_correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ErrorCounts error_counts;
};

// All three slots must match exactly.
bool exact_match(const Triple& pred, const Triple& gold);

// P = correct / predicted (abstentions excluded), R = correct / gold,
// F1 = 2PR / (P + R); any 0/0 is 0.
EvalReport evaluate(std::span<const std::optional<Triple>> preds, std::span<const Triple> golds);

// Counts KG relations per unordered entity pair.
class OverlapIndex {
 public:
  OverlapIndex() = default;
  explicit OverlapIndex(std::span<const Triple> kg);
  std::size_t relations_between(const std::string& a, const std::string& b) const;

 private:
  std::map<std::pair<std::string, std::string>, std::size_t> pair_counts_;
};

// Category of one incorrect prediction, by precedence:
// OOV entity, OOV predicate, overlapping relation (the gold entity pair is
// linked by more than one KG relation), the single wrong slot, several slots.
// An abstention counts as every slot wrong.
ErrorCategory classify_error(const std::optional<Triple>& pred, const Triple& gold,
                             const TripleVocab& vocab, const OverlapIndex& overlaps);

// Categories for every incorrect example.
ErrorCounts error_taxonomy(std::span<const std::optional<Triple>> preds,
                           std::span<const Triple> golds, const TripleVocab& vocab,
                           std::span<const Triple> kg);

// Human-readable table and line-oriented "key=value" records.
std::string format_report_table(const EvalReport& report);
std::string format_report_records(const EvalReport& report);

double median(std::vector<double> values);

struct AblationCell {
  std::vector<double> per_seed;
  double median = 0.0;
};

// Rows are flag configurations, columns datasets.
struct AblationGrid {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<AblationCell>> cells;
};

std::string format_ablation_grid(const AblationGrid& grid);

}  // namespace seq2rdf
