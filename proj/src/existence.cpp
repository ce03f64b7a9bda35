#include "exactdif/asymptotic.hpp"

#include "exactdif/error.hpp"

namespace exactdif {
namespace {

std::string margin_label(const AxisSpec& axes, AxisSet kept, std::size_t a, std::size_t g,
                         std::size_t r) {
  std::string s = "n[";
  s += kept.contains(Axis::ability) ? "a=" + std::to_string(axes.ability_levels[a]) : "+";
  s += ",";
  s += kept.contains(Axis::group) ? "g=" + std::to_string(g) : "+";
  s += ",";
  s += kept.contains(Axis::response) ? "r=" + axes.response_levels[r] : "+";
  return s + "]";
}

ExistenceReport zero_margin(const ContingencyTable& table, AxisSet kept) {
  const auto& axes = table.axes();
  const auto m = marginal(table, kept);
  const std::size_t eg = kept.contains(Axis::group) ? 2 : 1;
  const std::size_t er = kept.contains(Axis::response) ? axes.num_responses() : 1;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] != 0) continue;
    const std::size_t r = k % er, g = (k / er) % eg, a = k / (er * eg);
    ExistenceReport rep;
    rep.exists = false;
    rep.reason = ExistenceReason::zero_marginal;
    rep.witness = margin_label(axes, kept, a, g, r);
    return rep;
  }
  return {};
}

ExistenceReport separated(std::array<std::int64_t, 4> beta, std::string text) {
  ExistenceReport rep;
  rep.exists = false;
  rep.reason = ExistenceReason::separation;
  rep.beta = beta;
  rep.witness = std::move(text);
  return rep;
}

// One-dimensional threshold scan over abilities for the counts
// y0[a] (response 0) and y1[a] (response 1). Returns (a*, r*) on success.
bool threshold_split(const std::vector<Count>& y0, const std::vector<Count>& y1, std::size_t& cut,
                     int& r_star) {
  const std::size_t na = y0.size();
  for (int r = 0; r < 2; ++r) {
    const auto& same = r == 1 ? y1 : y0;   // must vanish left of a*
    const auto& other = r == 1 ? y0 : y1;  // must vanish right of a*
    for (std::size_t k = 0; k < na; ++k) {
      bool ok = true;
      for (std::size_t a = 0; a < k && ok; ++a) ok = same[a] == 0;
      for (std::size_t a = k + 1; a < na && ok; ++a) ok = other[a] == 0;
      if (ok) {
        cut = k;
        r_star = r;
        return true;
      }
    }
  }
  return false;
}

// beta for "response r* absent left of a*, response 1 - r* absent right".
std::array<std::int64_t, 2> threshold_beta(std::int64_t a_star, int r_star) {
  // r* = 1: left holds only response 0, so eta = a - a*.
  return r_star == 1 ? std::array<std::int64_t, 2>{-a_star, 1}
                     : std::array<std::int64_t, 2>{a_star, -1};
}

}  // namespace

bool collapsing_blocks_mle(const ContingencyTable& table, std::uint64_t ability_block,
                           std::uint64_t response_block) {
  const auto& axes = table.axes();
  Count c[2][2][2] = {};
  for (std::size_t a = 0; a < axes.num_abilities(); ++a)
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t r = 0; r < axes.num_responses(); ++r)
        c[(ability_block >> a) & 1u][g][(response_block >> r) & 1u] += table.at(a, g, r);
  bool even_zero = false, odd_zero = false;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        if (c[i][j][k] == 0) ((i + j + k) % 2 == 0 ? even_zero : odd_zero) = true;
  return even_zero && odd_zero;
}

ExistenceReport mle_exists_loglinear(const ContingencyTable& table, Level level) {
  const auto& axes = table.axes();
  if (level == Level::full) return {};
  if (auto r = zero_margin(table, {Axis::ability, Axis::group}); !r.exists) return r;
  if (auto r = zero_margin(table, {Axis::ability, Axis::response}); !r.exists) return r;
  if (level == Level::cond_indep) return {};
  if (auto r = zero_margin(table, {Axis::group, Axis::response}); !r.exists) return r;

  const std::size_t na = axes.num_abilities(), nr = axes.num_responses();
  if (na > 30 || nr > 30) throw InvalidArgument("collapsing check supports at most 30 levels per axis");
  // Two-block partitions; index 0 always stays in block 0.
  for (std::uint64_t am = 2; am < (std::uint64_t{1} << na); am += 2)
    for (std::uint64_t rm = 2; rm < (std::uint64_t{1} << nr); rm += 2) {
      if (!collapsing_blocks_mle(table, am, rm)) continue;
      ExistenceReport rep;
      rep.exists = false;
      rep.reason = ExistenceReason::collapsing_failure;
      rep.ability_block = am;
      rep.response_block = rm;
      std::string abil, resp;
      for (std::size_t a = 0; a < na; ++a)
        if ((am >> a) & 1u) abil += (abil.empty() ? "" : ",") + std::to_string(axes.ability_levels[a]);
      for (std::size_t r = 0; r < nr; ++r)
        if ((rm >> r) & 1u) resp += (resp.empty() ? "" : ",") + axes.response_levels[r];
      rep.witness = "2x2x2 collapsing with abilities {" + abil + "} and responses {" + resp +
                    "} against the rest has zeros of both parities";
      return rep;
    }
  return {};
}

bool separates(const ContingencyTable& table, const std::array<std::int64_t, 4>& beta) {
  const auto& axes = table.axes();
  if (!axes.dichotomous()) return false;
  bool nontrivial = false;
  for (std::size_t a = 0; a < axes.num_abilities(); ++a)
    for (std::size_t g = 0; g < 2; ++g) {
      const std::int64_t av = axes.ability_levels[a], gv = static_cast<std::int64_t>(g);
      const std::int64_t eta = beta[0] + beta[1] * av + beta[2] * gv + beta[3] * av * gv;
      const Count y0 = table.at(a, g, 0), y1 = table.at(a, g, 1);
      if (eta > 0 && y0 > 0) return false;
      if (eta < 0 && y1 > 0) return false;
      if (eta != 0 && y0 + y1 > 0) nontrivial = true;
    }
  return nontrivial;
}

ExistenceReport detect_separation(const ContingencyTable& table, Level level) {
  const auto& axes = table.axes();
  if (!axes.dichotomous()) throw InvalidArgument("separation is defined for dichotomous responses");
  const std::size_t na = axes.num_abilities();
  const auto& lv = axes.ability_levels;

  if (level == Level::cond_indep) {
    std::vector<Count> y0(na), y1(na);
    for (std::size_t a = 0; a < na; ++a) {
      y0[a] = table.at(a, 0, 0) + table.at(a, 1, 0);
      y1[a] = table.at(a, 0, 1) + table.at(a, 1, 1);
    }
    std::size_t cut = 0;
    int r_star = 0;
    if (threshold_split(y0, y1, cut, r_star)) {
      const auto b = threshold_beta(lv[cut], r_star);
      return separated({b[0], b[1], 0, 0}, "threshold a*=" + std::to_string(lv[cut]) +
                                               ", r*=" + axes.response_levels[r_star]);
    }
    return {};
  }

  if (level == Level::full) {
    for (std::size_t g = 0; g < 2; ++g) {
      std::vector<Count> y0(na), y1(na);
      for (std::size_t a = 0; a < na; ++a) {
        y0[a] = table.at(a, g, 0);
        y1[a] = table.at(a, g, 1);
      }
      std::size_t cut = 0;
      int r_star = 0;
      if (!threshold_split(y0, y1, cut, r_star)) continue;
      const auto b = threshold_beta(lv[cut], r_star);
      // eta restricted to one group: (b0 + b1 a) * g, or (b0 + b1 a) * (1 - g).
      const std::array<std::int64_t, 4> beta =
          g == 1 ? std::array<std::int64_t, 4>{0, 0, b[0], b[1]}
                 : std::array<std::int64_t, 4>{b[0], b[1], -b[0], -b[1]};
      return separated(beta, "group " + std::to_string(g) + " threshold a*=" +
                                 std::to_string(lv[cut]) + ", r*=" + axes.response_levels[r_star]);
    }
    return {};
  }

  // No3Way: lines through (a0*, 0) and (a1*, 1), f = a - a0* - (a1* - a0*) g,
  // plus the two horizontal lines g = 0 and g = 1.
  std::vector<std::pair<std::array<std::int64_t, 4>, std::string>> candidates;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      const std::array<std::int64_t, 4> f{-lv[i], 1, -(lv[j] - lv[i]), 0};
      const std::string line = "line through (" + std::to_string(lv[i]) + ",0) and (" +
                               std::to_string(lv[j]) + ",1)";
      candidates.push_back({f, line + ", r*=" + axes.response_levels[1]});
      candidates.push_back({{-f[0], -f[1], -f[2], 0}, line + ", r*=" + axes.response_levels[0]});
    }
  candidates.push_back({{0, 0, 1, 0}, "horizontal line g=0, group 1 only response " + axes.response_levels[1]});
  candidates.push_back({{0, 0, -1, 0}, "horizontal line g=0, group 1 only response " + axes.response_levels[0]});
  candidates.push_back({{1, 0, -1, 0}, "horizontal line g=1, group 0 only response " + axes.response_levels[1]});
  candidates.push_back({{-1, 0, 1, 0}, "horizontal line g=1, group 0 only response " + axes.response_levels[0]});
  for (const auto& [beta, text] : candidates)
    if (separates(table, beta)) return separated(beta, text);
  return {};
}

ExistenceReport mle_exists_logistic(const ContingencyTable& table, Level level) {
  if (!table.axes().dichotomous())
    throw InvalidArgument("logistic models need a dichotomous response");
  if (auto r = zero_margin(table, {Axis::ability, Axis::group}); !r.exists) return r;
  return detect_separation(table, level);
}

ExistenceReport mle_exists(const ContingencyTable& table, const ModelFamily& family) {
  switch (family.kind) {
    case FamilyKind::logistic: return mle_exists_logistic(table, family.level);
    case FamilyKind::cmh: return mle_exists_loglinear(table, family.level);
    case FamilyKind::loglinear:
      if (family.facets == ModelFamily::loglinear(family.level).facets)
        return mle_exists_loglinear(table, family.level);
      // Other hierarchical models: positive facet marginals (necessary only).
      for (AxisSet f : family.facets)
        if (!f.full())
          if (auto r = zero_margin(table, f); !r.exists) return r;
      return {};
  }
  return {};
}

}  // namespace exactdif
