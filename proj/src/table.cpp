#include "exactdif/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "exactdif/error.hpp"
#include "exactdif/logfact.hpp"

namespace exactdif {

std::string AxisSet::name() const {
  std::string s;
  if (contains(Axis::ability)) s += 'A';
  if (contains(Axis::group)) s += 'G';
  if (contains(Axis::response)) s += 'R';
  return s;
}

AxisSet AxisSet::parse(std::string_view text) {
  AxisSet s;
  for (char c : text) {
    switch (c) {
      case 'A': case 'a': s.bits_ |= static_cast<std::uint8_t>(Axis::ability); break;
      case 'G': case 'g': s.bits_ |= static_cast<std::uint8_t>(Axis::group); break;
      case 'R': case 'r': s.bits_ |= static_cast<std::uint8_t>(Axis::response); break;
      case ',': case ' ': case '{': case '}': break;
      default:
        throw InvalidArgument("unknown axis letter '" + std::string(1, c) + "' in \"" +
                              std::string(text) + "\"");
    }
  }
  return s;
}

AxisSpec::AxisSpec(std::vector<std::int64_t> abilities, std::vector<std::string> responses)
    : ability_levels(std::move(abilities)), response_levels(std::move(responses)) {
  validate();
}

AxisSpec AxisSpec::uniform(std::size_t num_abilities, std::size_t num_responses) {
  std::vector<std::int64_t> a(num_abilities);
  std::iota(a.begin(), a.end(), 0);
  std::vector<std::string> r;
  for (std::size_t i = 0; i < num_responses; ++i) r.push_back(std::to_string(i));
  return AxisSpec(std::move(a), std::move(r));
}

std::size_t AxisSpec::extent(Axis axis) const {
  switch (axis) {
    case Axis::ability: return num_abilities();
    case Axis::group: return num_groups();
    case Axis::response: return num_responses();
  }
  return 0;
}

void AxisSpec::validate() const {
  if (ability_levels.size() < 2) throw InvalidArgument("at least two ability levels are required");
  if (response_levels.size() < 2) throw InvalidArgument("at least two response levels are required");
  for (std::size_t i = 0; i < ability_levels.size(); ++i) {
    if (ability_levels[i] < 0) throw InvalidArgument("ability levels must be nonnegative integers");
    if (i > 0 && ability_levels[i] <= ability_levels[i - 1])
      throw InvalidArgument("ability levels must be strictly increasing");
  }
  std::set<std::string> seen(response_levels.begin(), response_levels.end());
  if (seen.size() != response_levels.size()) throw InvalidArgument("response labels must be distinct");
}

std::string AxisSpec::shape_string() const {
  return std::to_string(num_abilities()) + "x2x" + std::to_string(num_responses());
}

CellOrdering::CellOrdering(const AxisSpec& axes, std::vector<std::size_t> natural_index)
    : natural_index_(std::move(natural_index)), shape_(axes.shape_string()) {
  if (natural_index_.size() != axes.num_cells())
    throw InvalidArgument("cell ordering length does not match table shape");
  position_.assign(natural_index_.size(), natural_index_.size());
  for (std::size_t k = 0; k < natural_index_.size(); ++k) {
    std::size_t i = natural_index_[k];
    if (i >= natural_index_.size() || position_[i] != natural_index_.size())
      throw InvalidArgument("cell ordering is not a permutation");
    position_[i] = k;
  }
}

CellOrdering CellOrdering::canonical(const AxisSpec& axes) {
  const std::size_t na = axes.num_abilities(), nr = axes.num_responses();
  std::vector<std::size_t> idx;
  idx.reserve(axes.num_cells());
  for (std::size_t rr = 0; rr < nr; ++rr) {
    const std::size_t r = nr - 1 - rr;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t g = 0; g < 2; ++g) idx.push_back((a * 2 + g) * nr + r);
  }
  return CellOrdering(axes, std::move(idx));
}

CellOrdering CellOrdering::natural(const AxisSpec& axes) {
  std::vector<std::size_t> idx(axes.num_cells());
  std::iota(idx.begin(), idx.end(), 0);
  return CellOrdering(axes, std::move(idx));
}

ContingencyTable::ContingencyTable(AxisSpec axes, std::vector<Count> counts)
    : axes_(std::move(axes)), counts_(std::move(counts)) {
  axes_.validate();
  if (counts_.size() != axes_.num_cells())
    throw InvalidArgument("expected " + std::to_string(axes_.num_cells()) + " cell counts, got " +
                          std::to_string(counts_.size()));
  for (Count c : counts_) {
    if (c < 0) throw InvalidArgument("cell counts must be nonnegative");
    total_ += c;
  }
}

ContingencyTable::ContingencyTable(AxisSpec axes)
    : ContingencyTable(axes, std::vector<Count>(axes.num_cells(), 0)) {}

ContingencyTable ContingencyTable::from_vector(const AxisSpec& axes, std::span<const Count> values,
                                               const CellOrdering& ordering) {
  if (ordering.size() != axes.num_cells() || values.size() != axes.num_cells())
    throw InvalidArgument("vector/ordering does not match table shape " + axes.shape_string());
  std::vector<Count> counts(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) counts[ordering.natural_index(k)] = values[k];
  return ContingencyTable(axes, std::move(counts));
}

ContingencyTable ContingencyTable::from_canonical(const AxisSpec& axes,
                                                  std::span<const Count> values) {
  return from_vector(axes, values, CellOrdering::canonical(axes));
}

Cell ContingencyTable::cell(std::size_t natural) const {
  const std::size_t nr = axes_.num_responses();
  return Cell{natural / (2 * nr), (natural / nr) % 2, natural % nr};
}

std::vector<Count> marginal(const ContingencyTable& table, AxisSet kept) {
  if (kept.empty() || kept.full())
    throw InvalidArgument("marginal requires a nonempty proper subset of axes");
  const AxisSpec& ax = table.axes();
  const std::size_t na = ax.num_abilities(), nr = ax.num_responses();
  const std::size_t ea = kept.contains(Axis::ability) ? na : 1;
  const std::size_t eg = kept.contains(Axis::group) ? 2 : 1;
  const std::size_t er = kept.contains(Axis::response) ? nr : 1;
  std::vector<Count> out(ea * eg * er, 0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t r = 0; r < nr; ++r) {
        const std::size_t ia = ea > 1 ? a : 0, ig = eg > 1 ? g : 0, ir = er > 1 ? r : 0;
        out[(ia * eg + ig) * er + ir] += table.at(a, g, r);
      }
  return out;
}

std::vector<Count> to_vector(const ContingencyTable& table, const CellOrdering& ordering) {
  if (ordering.size() != table.num_cells() || ordering.shape() != table.axes().shape_string())
    throw InvalidArgument("cell ordering does not match table shape " +
                          table.axes().shape_string());
  std::vector<Count> v(table.num_cells());
  auto counts = table.natural_counts();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = counts[ordering.natural_index(k)];
  return v;
}

std::vector<Count> to_canonical(const ContingencyTable& table) {
  return to_vector(table, CellOrdering::canonical(table.axes()));
}

double log_uprob(std::span<const Count> cells) {
  double s = 0.0;
  for (Count c : cells) s -= log_factorial(c);
  return s;
}

double log_uprob(const ContingencyTable& table) { return log_uprob(table.natural_counts()); }

std::vector<std::int64_t> discretize(std::span<const double> x, int k) {
  if (k < 2) throw InvalidArgument("discretize needs at least two bins");
  if (x.empty()) return {};
  auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw InvalidArgument("cannot discretize a constant vector");
  // Breaks lo, lo + i*(hi-lo)/k, ..., hi; interior breaks computed the same
  // way R's seq(length.out=) does so boundary ties resolve identically.
  std::vector<double> breaks(static_cast<std::size_t>(k) + 1);
  const double width = (hi - lo) / k;
  breaks.front() = lo;
  for (int i = 1; i < k; ++i) breaks[static_cast<std::size_t>(i)] = lo + i * width;
  breaks.back() = hi;
  std::vector<std::int64_t> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // first break >= x; interval (b[j-1], b[j]] has code j-1
    auto it = std::lower_bound(breaks.begin() + 1, breaks.end(), x[i]);
    out[i] = static_cast<std::int64_t>(it - breaks.begin()) - 1;
  }
  return out;
}

}  // namespace exactdif
