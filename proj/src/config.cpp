#include "exactdif/config.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "exactdif/error.hpp"

namespace exactdif {

std::string to_string(Level level) {
  switch (level) {
    case Level::cond_indep: return "c";
    case Level::no3way: return "no3w";
    case Level::full: return "full";
  }
  return "?";
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::loglinear: return "loglinear";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::cmh: return "cmh";
  }
  return "?";
}

Level parse_level(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "c" || t == "cond" || t == "condindep" || t == "cond_indep" || t == "no23")
    return Level::cond_indep;
  if (t == "no3w" || t == "no3way" || t == "homogeneous") return Level::no3way;
  if (t == "full" || t == "saturated") return Level::full;
  throw InvalidArgument("unknown model level \"" + std::string(text) + "\"");
}

FamilyKind parse_family(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "loglinear" || t == "log-linear" || t == "ll") return FamilyKind::loglinear;
  if (t == "logistic" || t == "lr") return FamilyKind::logistic;
  if (t == "cmh") return FamilyKind::cmh;
  throw InvalidArgument("unknown model family \"" + std::string(text) + "\"");
}

ModelFamily ModelFamily::loglinear(Level level) {
  ModelFamily f;
  f.kind = FamilyKind::loglinear;
  f.level = level;
  const AxisSet ag{Axis::ability, Axis::group}, ar{Axis::ability, Axis::response},
      gr{Axis::group, Axis::response};
  switch (level) {
    case Level::cond_indep: f.facets = {ag, ar}; break;
    case Level::no3way: f.facets = {ag, ar, gr}; break;
    case Level::full: f.facets = {AxisSet{Axis::ability, Axis::group, Axis::response}}; break;
  }
  return f;
}

ModelFamily ModelFamily::loglinear(std::vector<AxisSet> facets) {
  ModelFamily f;
  f.kind = FamilyKind::loglinear;
  f.facets = std::move(facets);
  const AxisSet ag{Axis::ability, Axis::group}, ar{Axis::ability, Axis::response},
      gr{Axis::group, Axis::response};
  auto has = [&](AxisSet s) { return std::find(f.facets.begin(), f.facets.end(), s) != f.facets.end(); };
  if (f.facets.size() == 1 && f.facets[0].full())
    f.level = Level::full;
  else if (has(gr) && has(ag) && has(ar))
    f.level = Level::no3way;
  else
    f.level = Level::cond_indep;
  return f;
}

ModelFamily ModelFamily::logistic(Level level) {
  ModelFamily f;
  f.kind = FamilyKind::logistic;
  f.level = level;
  return f;
}

ModelFamily ModelFamily::cmh(Level level) {
  ModelFamily f;
  f.kind = FamilyKind::cmh;
  f.level = level;
  return f;
}

std::string ModelFamily::name() const {
  if (kind == FamilyKind::loglinear) {
    const auto canonical = ModelFamily::loglinear(level).facets;
    if (facets == canonical) return "loglinear/" + to_string(level);
    std::string s = "loglinear[";
    for (std::size_t i = 0; i < facets.size(); ++i) s += (i ? "," : "") + facets[i].name();
    return s + "]";
  }
  return to_string(kind) + "/" + to_string(level);
}

ConfigurationMatrix::ConfigurationMatrix(std::size_t rows, std::size_t cols,
                                         std::vector<std::int64_t> entries,
                                         std::vector<std::string> row_labels)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), row_labels_(std::move(row_labels)) {
  if (entries_.size() != rows_ * cols_) throw InvalidArgument("configuration entry count mismatch");
  if (row_labels_.empty()) {
    for (std::size_t i = 0; i < rows_; ++i) row_labels_.push_back("row" + std::to_string(i));
  }
  if (row_labels_.size() != rows_) throw InvalidArgument("configuration row label count mismatch");
  for (auto e : entries_)
    if (e < 0) throw InvalidArgument("configuration entries must be nonnegative");
  for (std::size_t j = 0; j < cols_; ++j) {
    bool nonzero = false;
    for (std::size_t i = 0; i < rows_ && !nonzero; ++i) nonzero = (*this)(i, j) != 0;
    if (!nonzero) throw InvalidArgument("configuration column " + std::to_string(j) + " is zero");
  }
}

std::vector<Count> ConfigurationMatrix::apply(std::span<const Count> v) const {
  if (v.size() != cols_) throw InvalidArgument("vector length does not match configuration");
  std::vector<Count> out(rows_, 0);
  for (std::size_t i = 0; i < rows_; ++i) {
    Count s = 0;
    for (std::size_t j = 0; j < cols_; ++j) s += entries_[i * cols_ + j] * v[j];
    out[i] = s;
  }
  return out;
}

std::string ConfigurationMatrix::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(rows_);
  mix(cols_);
  for (auto e : entries_) mix(static_cast<std::uint64_t>(e));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string cell_label(const AxisSpec& axes, AxisSet kept, std::size_t a, std::size_t g,
                       std::size_t r) {
  std::string s = "n[";
  s += kept.contains(Axis::ability) ? "a=" + std::to_string(axes.ability_levels[a]) : "+";
  s += ",";
  s += kept.contains(Axis::group) ? "g=" + std::to_string(g) : "+";
  s += ",";
  s += kept.contains(Axis::response) ? "r=" + axes.response_levels[r] : "+";
  return s + "]";
}

void require_dichotomous(const AxisSpec& axes, const char* what) {
  if (!axes.dichotomous())
    throw InvalidArgument(std::string(what) + " models require a dichotomous response, got " +
                          std::to_string(axes.num_responses()) + " levels");
}

}  // namespace

ConfigurationMatrix config_loglinear(const std::vector<AxisSet>& facets, const AxisSpec& axes) {
  axes.validate();
  if (facets.empty()) throw InvalidArgument("log-linear model needs at least one facet");
  for (std::size_t i = 0; i < facets.size(); ++i) {
    if (facets[i].empty()) throw InvalidArgument("empty facet");
    for (std::size_t j = 0; j < facets.size(); ++j)
      if (i != j && facets[i].subset_of(facets[j]))
        throw InvalidArgument("facet list must be an antichain (" + facets[i].name() + " within " +
                              facets[j].name() + ")");
  }
  const CellOrdering order = CellOrdering::canonical(axes);
  const std::size_t na = axes.num_abilities(), nr = axes.num_responses(), cols = axes.num_cells();
  std::vector<std::int64_t> entries;
  std::vector<std::string> labels;
  for (AxisSet f : facets) {
    const std::size_t ea = f.contains(Axis::ability) ? na : 1;
    const std::size_t eg = f.contains(Axis::group) ? 2 : 1;
    const std::size_t er = f.contains(Axis::response) ? nr : 1;
    const std::size_t first = labels.size();
    entries.resize(entries.size() + ea * eg * er * cols, 0);
    for (std::size_t a = 0; a < ea; ++a)
      for (std::size_t g = 0; g < eg; ++g)
        for (std::size_t r = 0; r < er; ++r) labels.push_back(cell_label(axes, f, a, g, r));
    for (std::size_t k = 0; k < cols; ++k) {
      const std::size_t nat = order.natural_index(k);
      const std::size_t a = nat / (2 * nr), g = (nat / nr) % 2, r = nat % nr;
      const std::size_t row = first + ((ea > 1 ? a : 0) * eg + (eg > 1 ? g : 0)) * er +
                              (er > 1 ? r : 0);
      entries[row * cols + k] = 1;
    }
  }
  const std::size_t rows = labels.size();
  return ConfigurationMatrix(rows, cols, std::move(entries), std::move(labels));
}

ConfigurationMatrix lawrence_lifting(std::size_t b_rows, std::size_t b_cols,
                                     std::span<const std::int64_t> b,
                                     std::vector<std::string> b_labels,
                                     std::vector<std::string> identity_labels) {
  if (b.size() != b_rows * b_cols) throw InvalidArgument("Lawrence lifting: bad block size");
  const std::size_t rows = b_rows + b_cols, cols = 2 * b_cols;
  std::vector<std::int64_t> e(rows * cols, 0);
  for (std::size_t i = 0; i < b_rows; ++i)
    for (std::size_t j = 0; j < b_cols; ++j) e[i * cols + j] = b[i * b_cols + j];
  for (std::size_t j = 0; j < b_cols; ++j) {
    e[(b_rows + j) * cols + j] = 1;
    e[(b_rows + j) * cols + b_cols + j] = 1;
  }
  b_labels.insert(b_labels.end(), identity_labels.begin(), identity_labels.end());
  return ConfigurationMatrix(rows, cols, std::move(e), std::move(b_labels));
}

ConfigurationMatrix config_logistic(Level level, const AxisSpec& axes) {
  axes.validate();
  require_dichotomous(axes, "logistic");
  const std::size_t na = axes.num_abilities(), bc = 2 * na;
  // Columns of B are (a, g) pairs, a ascending then g ascending, which is
  // also the order of the r=1 and r=0 halves of the canonical cell vector.
  std::vector<std::vector<std::int64_t>> rows;
  std::vector<std::string> labels;
  const std::string one = axes.response_levels[1];
  std::vector<std::int64_t> ones(bc, 1), ab(bc), gr(bc), ag(bc);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t g = 0; g < 2; ++g) {
      ab[a * 2 + g] = axes.ability_levels[a];
      gr[a * 2 + g] = static_cast<std::int64_t>(g);
      ag[a * 2 + g] = axes.ability_levels[a] * static_cast<std::int64_t>(g);
    }
  rows.push_back(ones);
  labels.push_back("n[+,+,r=" + one + "]");
  rows.push_back(ab);
  labels.push_back("sum a*n[a,+,r=" + one + "]");
  if (level == Level::no3way || level == Level::full) {
    rows.push_back(gr);
    labels.push_back("n[+,g=1,r=" + one + "]");
  }
  if (level == Level::full) {
    rows.push_back(ag);
    labels.push_back("sum a*n[a,g=1,r=" + one + "]");
  }
  // A zero row (e.g. the a-row when every ability is 0) would not change the
  // fibers; ability levels are distinct so at most one column of `ab` is 0.
  std::vector<std::int64_t> b;
  for (const auto& r : rows) b.insert(b.end(), r.begin(), r.end());
  std::vector<std::string> id_labels;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t g = 0; g < 2; ++g)
      id_labels.push_back(cell_label(axes, AxisSet{Axis::ability, Axis::group}, a, g, 0));
  return lawrence_lifting(rows.size(), bc, b, std::move(labels), std::move(id_labels));
}

ConfigurationMatrix config_cmh(Level level, const AxisSpec& axes) {
  axes.validate();
  require_dichotomous(axes, "CMH");
  if (level == Level::full) throw InvalidArgument("the CMH family has no full model");
  const std::size_t na = axes.num_abilities(), cols = axes.num_cells();
  const CellOrdering order = CellOrdering::canonical(axes);
  std::vector<std::int64_t> e;
  std::vector<std::string> labels;
  auto add_row = [&](auto pred, std::string label) {
    for (std::size_t k = 0; k < cols; ++k) {
      const std::size_t nat = order.natural_index(k);
      e.push_back(pred(nat / 4, (nat / 2) % 2, nat % 2) ? 1 : 0);
    }
    labels.push_back(std::move(label));
  };
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t g = 0; g < 2; ++g)
      add_row([=](std::size_t ca, std::size_t cg, std::size_t) { return ca == a && cg == g; },
              cell_label(axes, AxisSet{Axis::ability, Axis::group}, a, g, 0));
  for (std::size_t a = 0; a < na; ++a)
    add_row([=](std::size_t ca, std::size_t, std::size_t cr) { return ca == a && cr == 1; },
            cell_label(axes, AxisSet{Axis::ability, Axis::response}, a, 0, 1));
  if (level != Level::cond_indep)
    add_row([](std::size_t, std::size_t cg, std::size_t cr) { return cg == 1 && cr == 1; },
            cell_label(axes, AxisSet{Axis::group, Axis::response}, 0, 1, 1));
  const std::size_t rows = labels.size();
  return ConfigurationMatrix(rows, cols, std::move(e), std::move(labels));
}

ConfigurationMatrix configuration(const ModelFamily& family, const AxisSpec& axes) {
  switch (family.kind) {
    case FamilyKind::loglinear: return config_loglinear(family.facets, axes);
    case FamilyKind::logistic: return config_logistic(family.level, axes);
    case FamilyKind::cmh: return config_cmh(family.level, axes);
  }
  throw InvalidArgument("unknown model family");
}

std::vector<Count> sufficient_statistics(const ConfigurationMatrix& config,
                                         const ContingencyTable& table) {
  return config.apply(to_canonical(table));
}

std::vector<std::int64_t> rescale_abilities(std::span<const Rational> levels) {
  if (levels.empty()) return {};
  const Rational lo = *std::min_element(levels.begin(), levels.end());
  std::int64_t den = 1;
  for (const auto& x : levels) den = std::lcm(den, (x - lo).denominator());
  std::vector<std::int64_t> out;
  std::int64_t g = 0;
  for (const auto& x : levels) {
    const Rational d = (x - lo) * den;
    out.push_back(d.numerator());
    g = std::gcd(g, d.numerator());
  }
  if (g > 1)
    for (auto& v : out) v /= g;
  return out;
}

void write_matrix_text(std::ostream& out, const ConfigurationMatrix& config) {
  out << config.rows() << ' ' << config.cols() << '\n';
  for (std::size_t i = 0; i < config.rows(); ++i) {
    for (std::size_t j = 0; j < config.cols(); ++j) out << (j ? " " : "") << config(i, j);
    out << '\n';
  }
}

ConfigurationMatrix read_matrix_text(std::istream& in) {
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw ParseError("matrix text: missing \"rows cols\" header");
  std::vector<std::int64_t> e(rows * cols);
  for (auto& x : e)
    if (!(in >> x)) throw ParseError("matrix text: too few entries");
  return ConfigurationMatrix(rows, cols, std::move(e), {});
}

}  // namespace exactdif
