#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactdif/asymptotic.hpp"
#include "exactdif/csv_io.hpp"
#include "exactdif/sampler.hpp"

namespace exactdif {

enum class DifConclusion { no_dif, uniform, nonuniform, failure, unclassifiable };
enum class Strategy { asymptotic, exact };
enum class Variant { standard, swapped, nested_augmented };

/// "none", "uniform", "nonuniform", "failure", "unclassifiable".
std::string to_string(DifConclusion c);
std::string to_string(Strategy s);
std::string to_string(Variant v);
DifConclusion parse_conclusion(std::string_view text);
Strategy parse_strategy(std::string_view text);
Variant parse_variant(std::string_view text);

struct AnalysisSpec {
  FamilyKind family = FamilyKind::loglinear;
  Strategy strategy = Strategy::asymptotic;
  Variant variant = Variant::standard;
  double alpha = 0.05;
  WalkConfig walk;
  /// Also test the full model (logistic only), used for star annotations.
  bool test_full = true;
  /// Treat an unmet sample-size heuristic like a nonexistent MLE.
  bool heuristic_gated = false;
  ExactTestOptions exact;

  /// Throws InvalidArgument when the spec cannot be applied to `axes`.
  void validate(const AxisSpec& axes) const;
  /// e.g. "logistic/exact".
  std::string name() const;
};

/// One goodness-of-fit test as it was run.
struct ModelTest {
  Level level = Level::cond_indep;
  std::optional<double> p_value;
  ExistenceReport existence;           ///< asymptotic strategy only
  std::optional<GofResult> gof;        ///< asymptotic strategy only
  std::optional<ExactTestResult> exact;
};

struct ItemReport {
  std::string item;
  DifConclusion conclusion = DifConclusion::no_dif;
  std::optional<double> p_c, p_no3w, p_full;
  /// Nested-augmented variant: chi-square p-value of G(c) - G(no3w).
  std::optional<double> p_nested;
  std::vector<ModelTest> tests;  ///< in the order they were run
  /// Batch annotations (BH across items).
  std::optional<double> p_c_adjusted, p_full_adjusted;
  bool dagger = false;  ///< DIF conclusion that becomes "none" after BH on p_c
  bool star = false;    ///< BH-adjusted full-model p-value <= alpha
  std::string error;    ///< non-empty when the analysis threw (batch mode)
};

/// Two-step DIF analysis of one item.
ItemReport analyze(const ContingencyTable& table, const AnalysisSpec& spec,
                   const std::string& item = "");

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> pvalues);

struct BatchResult {
  AnalysisSpec spec;
  std::vector<ItemReport> items;
};

/// Analyzes every item (in parallel with `jobs` threads), then adds the BH
/// annotations. Item k walks with seed stream k of spec.walk.seed.
BatchResult batch_analyze(const std::vector<ItemTable>& tables, const AnalysisSpec& spec,
                          int jobs = 1);

/// Walk seed used for item `index` of a batch.
std::uint64_t item_seed(std::uint64_t seed, std::size_t index);

/// Summary-table cell text, e.g. "nonuniform†" or "none".
std::string table_cell(const ItemReport& report);

}  // namespace exactdif
