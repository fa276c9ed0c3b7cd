#include <doctest.h>

#include <algorithm>

#include "seq2rdf/error.hpp"
#include "seq2rdf/eval.hpp"

using namespace seq2rdf;

namespace {

Triple t(const std::string& s, const std::string& p, const std::string& o) { return {s, p, o}; }

TripleVocab small_vocab() {
  return TripleVocab({"e:A", "e:B", "e:C"}, {"p:x", "p:y"});
}

}  // namespace

TEST_CASE("exact match needs all three slots") {
  CHECK(exact_match(t("a", "p", "b"), t("a", "p", "b")));
  CHECK_FALSE(exact_match(t("a", "p", "c"), t("a", "p", "b")));
  CHECK_FALSE(exact_match(t("b", "p", "a"), t("a", "p", "b")));
}

TEST_CASE("precision recall F1 with abstentions") {
  // 5 gold, 4 predictions, 3 correct.
  const std::vector<Triple> gold{t("a", "p", "b"), t("c", "p", "d"), t("e", "p", "f"),
                                 t("g", "p", "h"), t("i", "p", "j")};
  const std::vector<std::optional<Triple>> preds{gold[0], gold[1], gold[2], t("g", "q", "h"),
                                                 std::nullopt};
  const auto r = evaluate(preds, gold);
  CHECK(r.n_gold == 5);
  CHECK(r.n_predicted == 4);
  CHECK(r.n_correct == 3);
  CHECK(r.precision == doctest::Approx(0.75));
  CHECK(r.recall == doctest::Approx(0.6));
  CHECK(r.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(r.f1 == doctest::Approx(0.666667).epsilon(1e-6));
}

TEST_CASE("evaluation edge cases") {
  const std::vector<Triple> gold{t("a", "p", "b"), t("c", "p", "d")};
  const std::vector<std::optional<Triple>> all(gold.begin(), gold.end());
  auto r = evaluate(all, gold);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);

  const std::vector<std::optional<Triple>> none(2);
  r = evaluate(none, gold);
  CHECK(r.n_predicted == 0);
  CHECK(r.precision == 0.0);
  CHECK(r.f1 == 0.0);

  r = evaluate(std::span<const std::optional<Triple>>{}, std::span<const Triple>{});
  CHECK(r.f1 == 0.0);

  CHECK_THROWS_AS(evaluate(none, std::vector<Triple>{gold[0]}), Error);
}

TEST_CASE("error taxonomy precedence") {
  const auto vocab = small_vocab();
  const std::vector<Triple> kg{t("e:A", "p:x", "e:B"), t("e:B", "p:y", "e:A"), t("e:A", "p:x", "e:C")};
  const OverlapIndex overlaps(kg);
  CHECK(overlaps.relations_between("e:A", "e:B") == 2);
  CHECK(overlaps.relations_between("e:B", "e:A") == 2);
  CHECK(overlaps.relations_between("e:A", "e:C") == 1);
  CHECK(overlaps.relations_between("e:B", "e:C") == 0);

  const auto cls = [&](std::optional<Triple> pred, const Triple& gold) {
    return classify_error(pred, gold, vocab, overlaps);
  };
  // OOV beats everything, entity before predicate.
  CHECK(cls(t("e:A", "p:x", "e:B"), t("e:Z", "p:zz", "e:B")) == ErrorCategory::kOovEntity);
  CHECK(cls(t("e:A", "p:x", "e:B"), t("e:A", "p:zz", "e:C")) == ErrorCategory::kOovPredicate);
  // Overlap beats the slot categories.
  CHECK(cls(t("e:A", "p:y", "e:B"), t("e:A", "p:x", "e:B")) == ErrorCategory::kOverlappingRelation);
  CHECK(cls(t("e:B", "p:x", "e:C"), t("e:A", "p:x", "e:C")) == ErrorCategory::kWrongSubject);
  CHECK(cls(t("e:A", "p:y", "e:C"), t("e:A", "p:x", "e:C")) == ErrorCategory::kWrongPredicate);
  CHECK(cls(t("e:A", "p:x", "e:B"), t("e:A", "p:x", "e:C")) == ErrorCategory::kWrongObject);
  CHECK(cls(t("e:C", "p:y", "e:C"), t("e:A", "p:x", "e:C")) == ErrorCategory::kMultipleWrong);
  CHECK(cls(std::nullopt, t("e:A", "p:x", "e:C")) == ErrorCategory::kMultipleWrong);

  const std::vector<Triple> golds{t("e:A", "p:x", "e:C"), t("e:A", "p:x", "e:C"), t("e:Z", "p:x", "e:C")};
  const std::vector<std::optional<Triple>> preds{golds[0], t("e:A", "p:y", "e:C"), t("e:A", "p:x", "e:C")};
  const auto counts = error_taxonomy(preds, golds, vocab, kg);
  CHECK(counts.size() == 2);
  CHECK(counts.at(ErrorCategory::kWrongPredicate) == 1);
  CHECK(counts.at(ErrorCategory::kOovEntity) == 1);
}

TEST_CASE("report formats") {
  EvalReport r;
  r.n_gold = 5;
  r.n_predicted = 4;
  r.n_correct = 3;
  r.precision = 0.75;
  r.recall = 0.6;
  r.f1 = 2 * 0.75 * 0.6 / 1.35;
  r.error_counts[ErrorCategory::kWrongObject] = 1;
  const auto records = format_report_records(r);
  CHECK(records.find("precision=0.750000000\n") != std::string::npos);
  CHECK(records.find("f1=0.666666667\n") != std::string::npos);
  CHECK(records.find("error.WRONG_OBJECT=1\n") != std::string::npos);
  CHECK(records.find("error.OOV_ENTITY=0\n") != std::string::npos);
  const auto table = format_report_table(r);
  CHECK(table.find("F1         0.666667") != std::string::npos);
  CHECK(table.find("WRONG_OBJECT") != std::string::npos);
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("ablation grid layout") {
  AblationGrid g;
  g.rows = {"Seq2Seq", "S+A+W+G"};
  g.columns = {"synthetic"};
  g.cells = {{{{0.1, 0.2, 0.3}, 0.2}}, {{{0.25, 0.5, 0.75}, 0.5}}};
  const auto text = format_ablation_grid(g);
  CHECK(text.find("Config") == 0);
  CHECK(text.find("synthetic") != std::string::npos);
  CHECK(text.find("Seq2Seq             20.0\n") != std::string::npos);
  CHECK(text.find("S+A+W+G             50.0\n") != std::string::npos);
  CHECK(text.find("  S+A+W+G / synthetic: 25.0 50.0 75.0\n") != std::string::npos);

  AblationGrid one;
  one.rows = {"S+A"};
  one.columns = {"d"};
  one.cells = {{{{0.5}, 0.5}}};
  const auto t1 = format_ablation_grid(one);
  CHECK(std::count(t1.begin(), t1.end(), '\n') == 4);
}
