#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "exactdif/table.hpp"

namespace exactdif {

enum class Level { cond_indep, no3way, full };
enum class FamilyKind { loglinear, logistic, cmh };

std::string to_string(Level level);
std::string to_string(FamilyKind kind);
/// Accepts "c", "cond", "condindep", "no3w", "no3way", "full", "saturated".
Level parse_level(std::string_view text);
FamilyKind parse_family(std::string_view text);

/// A model family at one nesting level. Log-linear families carry their
/// generating facets; `facets` is filled in by the named constructors.
struct ModelFamily {
  FamilyKind kind = FamilyKind::loglinear;
  Level level = Level::cond_indep;
  std::vector<AxisSet> facets;

  static ModelFamily loglinear(Level level);
  static ModelFamily loglinear(std::vector<AxisSet> facets);
  static ModelFamily logistic(Level level);
  static ModelFamily cmh(Level level);

  /// e.g. "loglinear/no3w" or "loglinear[AG,AR]".
  std::string name() const;
  bool requires_dichotomous() const { return kind != FamilyKind::loglinear; }
};

/// Nonnegative integer matrix mapping the canonical cell vector to the
/// model's sufficient statistics.
class ConfigurationMatrix {
 public:
  ConfigurationMatrix() = default;
  ConfigurationMatrix(std::size_t rows, std::size_t cols, std::vector<std::int64_t> entries,
                      std::vector<std::string> row_labels);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  std::span<const std::int64_t> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }
  const std::vector<std::int64_t>& entries() const { return entries_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }

  /// config * v for a vector in canonical cell order.
  std::vector<Count> apply(std::span<const Count> v) const;

  /// Stable 64-bit hash of the shape and entries, rendered as 16 hex digits.
  std::string fingerprint() const;

  friend bool operator==(const ConfigurationMatrix& x, const ConfigurationMatrix& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.entries_ == y.entries_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::int64_t> entries_;
  std::vector<std::string> row_labels_;
};

ConfigurationMatrix config_loglinear(const std::vector<AxisSet>& facets, const AxisSpec& axes);
ConfigurationMatrix config_logistic(Level level, const AxisSpec& axes);
ConfigurationMatrix config_cmh(Level level, const AxisSpec& axes);
ConfigurationMatrix configuration(const ModelFamily& family, const AxisSpec& axes);

/// Statistic values aligned with the configuration's row labels.
std::vector<Count> sufficient_statistics(const ConfigurationMatrix& config,
                                         const ContingencyTable& table);

/// Lawrence lifting [[B, 0], [I, I]] of an integer matrix B (row-major,
/// `b_rows` x `b_cols`).
ConfigurationMatrix lawrence_lifting(std::size_t b_rows, std::size_t b_cols,
                                     std::span<const std::int64_t> b,
                                     std::vector<std::string> b_labels,
                                     std::vector<std::string> identity_labels);

using Rational = boost::rational<std::int64_t>;

/// Affine map a -> alpha*a + beta (alpha > 0) onto coprime nonnegative
/// integers that include 0.
std::vector<std::int64_t> rescale_abilities(std::span<const Rational> levels);

/// Plain text matrix: first line "rows cols", then one row per line.
void write_matrix_text(std::ostream& out, const ConfigurationMatrix& config);
ConfigurationMatrix read_matrix_text(std::istream& in);

}  // namespace exactdif
