#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace exactdif {

using Count = std::int64_t;

enum class Axis : std::uint8_t { ability = 1, group = 2, response = 4 };

/// Bit set over {ability, group, response}.
class AxisSet {
 public:
  constexpr AxisSet() = default;
  constexpr AxisSet(std::initializer_list<Axis> axes) {
    for (Axis a : axes) bits_ |= static_cast<std::uint8_t>(a);
  }
  static constexpr AxisSet from_bits(std::uint8_t bits) {
    AxisSet s;
    s.bits_ = bits & 7u;
    return s;
  }
  constexpr bool contains(Axis a) const { return (bits_ & static_cast<std::uint8_t>(a)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool full() const { return bits_ == 7; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool subset_of(AxisSet other) const { return (bits_ & ~other.bits_) == 0; }
  friend constexpr bool operator==(AxisSet, AxisSet) = default;

  /// Compact name such as "AG" or "AGR".
  std::string name() const;
  /// Parses "AG", "ag", "A,R", ...
  static AxisSet parse(std::string_view text);

 private:
  std::uint8_t bits_ = 0;
};

/// Level sets of the three axes. Groups are always {0, 1}.
struct AxisSpec {
  std::vector<std::int64_t> ability_levels;
  std::vector<std::string> response_levels;

  AxisSpec() = default;
  AxisSpec(std::vector<std::int64_t> abilities, std::vector<std::string> responses);

  /// abilities 0..num_abilities-1, responses "0".."num_responses-1".
  static AxisSpec uniform(std::size_t num_abilities, std::size_t num_responses);

  std::size_t num_abilities() const { return ability_levels.size(); }
  static constexpr std::size_t num_groups() { return 2; }
  std::size_t num_responses() const { return response_levels.size(); }
  std::size_t num_cells() const { return num_abilities() * num_groups() * num_responses(); }
  bool dichotomous() const { return num_responses() == 2; }
  std::size_t extent(Axis axis) const;

  /// Throws InvalidArgument if any invariant fails.
  void validate() const;

  /// e.g. "6x2x2".
  std::string shape_string() const;

  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// Index of a cell in the natural (ability, group, response) row-major layout.
struct Cell {
  std::size_t a = 0;
  std::size_t g = 0;
  std::size_t r = 0;
};

/// Permutation of cells: position k of the flattened vector holds cell
/// `natural_index(k)` of the (a, g, r) row-major layout.
class CellOrdering {
 public:
  CellOrdering() = default;
  CellOrdering(const AxisSpec& axes, std::vector<std::size_t> natural_index);

  /// Response descending, then ability ascending, then group ascending.
  static CellOrdering canonical(const AxisSpec& axes);
  /// Plain (a, g, r) row-major order.
  static CellOrdering natural(const AxisSpec& axes);

  std::size_t size() const { return natural_index_.size(); }
  std::size_t natural_index(std::size_t position) const { return natural_index_[position]; }
  std::size_t position_of(std::size_t natural) const { return position_[natural]; }
  const std::string& shape() const { return shape_; }

 private:
  std::vector<std::size_t> natural_index_;
  std::vector<std::size_t> position_;
  std::string shape_;
};

/// Dense three-way table of nonnegative counts. Immutable after construction.
class ContingencyTable {
 public:
  ContingencyTable() = default;
  /// `counts` in natural (a, g, r) row-major layout.
  ContingencyTable(AxisSpec axes, std::vector<Count> counts);
  /// All-zero table.
  explicit ContingencyTable(AxisSpec axes);

  static ContingencyTable from_vector(const AxisSpec& axes, std::span<const Count> values,
                                      const CellOrdering& ordering);
  static ContingencyTable from_canonical(const AxisSpec& axes, std::span<const Count> values);

  const AxisSpec& axes() const { return axes_; }
  Count total() const { return total_; }
  std::size_t num_cells() const { return counts_.size(); }

  Count at(std::size_t a, std::size_t g, std::size_t r) const { return counts_[index(a, g, r)]; }
  std::size_t index(std::size_t a, std::size_t g, std::size_t r) const {
    return (a * 2 + g) * axes_.num_responses() + r;
  }
  Cell cell(std::size_t natural) const;
  std::span<const Count> natural_counts() const { return counts_; }

  friend bool operator==(const ContingencyTable& x, const ContingencyTable& y) {
    return x.axes_ == y.axes_ && x.counts_ == y.counts_;
  }

 private:
  AxisSpec axes_;
  std::vector<Count> counts_;
  Count total_ = 0;
};

/// Sums over the axes not in `kept`. The result is row-major over the kept
/// axes in (A, G, R) order.
std::vector<Count> marginal(const ContingencyTable& table, AxisSet kept);

std::vector<Count> to_vector(const ContingencyTable& table, const CellOrdering& ordering);
std::vector<Count> to_canonical(const ContingencyTable& table);

/// -sum ln(n!) over cells: log of the unnormalized hypergeometric fiber weight.
double log_uprob(const ContingencyTable& table);
double log_uprob(std::span<const Count> cells);

/// Equal-width binning into {0..k-1}; intervals are right-closed and the
/// first one is closed on both ends.
std::vector<std::int64_t> discretize(std::span<const double> x, int k);

}  // namespace exactdif
