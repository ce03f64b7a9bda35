#include "exactdif/asymptotic.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "exactdif/error.hpp"
#include "exactdif/intlinalg.hpp"

namespace exactdif {
namespace {

double multinomial_loglik(std::span<const Count> n, const std::vector<double>& nu) {
  double total = 0.0;
  for (Count c : n) total += static_cast<double>(c);
  double ll = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i)
    if (n[i] > 0) ll += static_cast<double>(n[i]) * std::log(nu[i] / total);
  return ll;
}

// Cell-to-marginal index for one facet, natural layout.
std::vector<std::size_t> facet_index(const AxisSpec& axes, AxisSet facet, std::size_t& size) {
  const std::size_t na = axes.num_abilities(), nr = axes.num_responses();
  const std::size_t eg = facet.contains(Axis::group) ? 2 : 1;
  const std::size_t er = facet.contains(Axis::response) ? nr : 1;
  size = (facet.contains(Axis::ability) ? na : 1) * eg * er;
  std::vector<std::size_t> idx(axes.num_cells());
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t r = 0; r < nr; ++r) {
        const std::size_t ka = facet.contains(Axis::ability) ? a : 0;
        const std::size_t kg = facet.contains(Axis::group) ? g : 0;
        const std::size_t kr = facet.contains(Axis::response) ? r : 0;
        idx[(a * 2 + g) * nr + r] = (ka * eg + kg) * er + kr;
      }
  return idx;
}

std::array<double, 4> design_row(Level level, double a, double g) {
  switch (level) {
    case Level::cond_indep: return {1.0, a, 0.0, 0.0};
    case Level::no3way: return {1.0, a, g, 0.0};
    case Level::full: return {1.0, a, g, a * g};
  }
  return {};
}

// Solves the k x k system m x = b by Gaussian elimination with partial
// pivoting; returns false when singular.
bool solve_small(std::array<std::array<double, 4>, 4> m, std::array<double, 4> b, std::size_t k,
                 std::array<double, 4>& x) {
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    if (std::abs(m[p][c]) < 1e-300) return false;
    std::swap(m[p], m[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j < k; ++j) m[r][j] -= f * m[c][j];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = k; c-- > 0;) {
    double s = b[c];
    for (std::size_t j = c + 1; j < k; ++j) s -= m[c][j] * x[j];
    x[c] = s / m[c][c];
  }
  return true;
}

double sigmoid(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

struct Grouped {
  std::vector<double> a, g, y, m;
};

Grouped grouped_binomial(const ContingencyTable& table) {
  Grouped d;
  const auto& axes = table.axes();
  for (std::size_t a = 0; a < axes.num_abilities(); ++a)
    for (std::size_t g = 0; g < 2; ++g) {
      d.a.push_back(static_cast<double>(axes.ability_levels[a]));
      d.g.push_back(static_cast<double>(g));
      d.y.push_back(static_cast<double>(table.at(a, g, 1)));
      d.m.push_back(static_cast<double>(table.at(a, g, 0) + table.at(a, g, 1)));
    }
  return d;
}

double binomial_loglik(const Grouped& d, Level level, const std::array<double, 4>& beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    const auto x = design_row(level, d.a[i], d.g[i]);
    double eta = 0.0;
    for (std::size_t j = 0; j < 4; ++j) eta += x[j] * beta[j];
    // log sigma(eta) and log(1 - sigma(eta)) without cancellation
    const double log_p = -std::log1p(std::exp(-std::abs(eta))) + std::min(eta, 0.0);
    const double log_q = -std::log1p(std::exp(-std::abs(eta))) + std::min(-eta, 0.0);
    if (d.y[i] > 0) ll += d.y[i] * log_p;
    if (d.m[i] - d.y[i] > 0) ll += (d.m[i] - d.y[i]) * log_q;
  }
  return ll;
}

}  // namespace

std::string to_string(ExistenceReason reason) {
  switch (reason) {
    case ExistenceReason::ok: return "ok";
    case ExistenceReason::zero_marginal: return "zero_marginal";
    case ExistenceReason::separation: return "separation";
    case ExistenceReason::collapsing_failure: return "collapsing_failure";
  }
  return "unknown";
}

MleFit mle_closedform_c(const ContingencyTable& table) {
  const auto& axes = table.axes();
  const std::size_t na = axes.num_abilities(), nr = axes.num_responses();
  const auto ag = marginal(table, {Axis::ability, Axis::group});
  const auto ar = marginal(table, {Axis::ability, Axis::response});
  const auto a_only = marginal(table, {Axis::ability});
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t g = 0; g < 2; ++g)
      if (ag[a * 2 + g] == 0)
        throw MleNonexistent("zero marginal n[a=" + std::to_string(axes.ability_levels[a]) +
                             ",g=" + std::to_string(g) + ",+]");
    for (std::size_t r = 0; r < nr; ++r)
      if (ar[a * nr + r] == 0)
        throw MleNonexistent("zero marginal n[a=" + std::to_string(axes.ability_levels[a]) +
                             ",+,r=" + axes.response_levels[r] + "]");
  }
  MleFit fit;
  fit.expected.resize(axes.num_cells());
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t r = 0; r < nr; ++r)
        fit.expected[table.index(a, g, r)] = static_cast<double>(ag[a * 2 + g]) *
                                             static_cast<double>(ar[a * nr + r]) /
                                             static_cast<double>(a_only[a]);
  fit.converged = true;
  fit.loglik = multinomial_loglik(table.natural_counts(), fit.expected);
  return fit;
}

MleFit ipf_fit(const ContingencyTable& table, const std::vector<AxisSet>& facets,
               const IpfOptions& options) {
  if (facets.empty()) throw InvalidArgument("IPF needs at least one facet");
  const auto& axes = table.axes();
  const std::size_t cells = axes.num_cells();
  struct Margin {
    std::vector<std::size_t> index;
    std::vector<double> observed;
  };
  std::vector<Margin> margins;
  for (AxisSet f : facets) {
    if (f.empty()) throw InvalidArgument("empty facet");
    Margin m;
    std::size_t size = 0;
    m.index = facet_index(axes, f, size);
    m.observed.assign(size, 0.0);
    for (std::size_t c = 0; c < cells; ++c)
      m.observed[m.index[c]] += static_cast<double>(table.natural_counts()[c]);
    margins.push_back(std::move(m));
  }
  MleFit fit;
  fit.expected.assign(cells, 1.0);
  std::vector<double> current;
  for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
    for (const auto& m : margins) {
      current.assign(m.observed.size(), 0.0);
      for (std::size_t c = 0; c < cells; ++c) current[m.index[c]] += fit.expected[c];
      for (std::size_t c = 0; c < cells; ++c) {
        const double cur = current[m.index[c]];
        fit.expected[c] = cur > 0.0 ? fit.expected[c] * m.observed[m.index[c]] / cur : 0.0;
      }
    }
    double worst = 0.0;
    for (const auto& m : margins) {
      current.assign(m.observed.size(), 0.0);
      for (std::size_t c = 0; c < cells; ++c) current[m.index[c]] += fit.expected[c];
      for (std::size_t k = 0; k < current.size(); ++k)
        worst = std::max(worst, std::abs(current[k] - m.observed[k]));
    }
    fit.iterations = cycle;
    if (worst < options.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.loglik = multinomial_loglik(table.natural_counts(), fit.expected);
  return fit;
}

LogisticFit irls_logistic(const ContingencyTable& table, Level level, const IrlsOptions& options) {
  const ExistenceReport ex = mle_exists_logistic(table, level);
  if (!ex.exists) throw MleNonexistent("logistic MLE does not exist: " + ex.witness);
  const Grouped d = grouped_binomial(table);
  LogisticCoefficients coef;
  coef.level = level;
  const std::size_t k = coef.size();

  double ysum = 0.0, msum = 0.0;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    ysum += d.y[i];
    msum += d.m[i];
  }
  std::array<double, 4> beta{0.0, 0.0, 0.0, 0.0};
  const double p0 = std::clamp(ysum / msum, 1e-6, 1.0 - 1e-6);
  beta[0] = std::log(p0 / (1.0 - p0));
  double ll = binomial_loglik(d, level, beta);

  LogisticFit out;
  bool converged = false;
  int iter = 0;
  for (; iter <= options.max_iter; ++iter) {
    std::array<double, 4> score{0.0, 0.0, 0.0, 0.0};
    std::array<std::array<double, 4>, 4> info{};
    for (std::size_t i = 0; i < d.a.size(); ++i) {
      const auto x = design_row(level, d.a[i], d.g[i]);
      double eta = 0.0;
      for (std::size_t j = 0; j < k; ++j) eta += x[j] * beta[j];
      const double p = sigmoid(eta);
      const double w = d.m[i] * p * (1.0 - p);
      for (std::size_t j = 0; j < k; ++j) {
        score[j] += x[j] * (d.y[i] - d.m[i] * p);
        for (std::size_t l = 0; l < k; ++l) info[j][l] += w * x[j] * x[l];
      }
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < k; ++j) norm += score[j] * score[j];
    if (std::sqrt(norm) < options.tol) {
      converged = true;
      break;
    }
    if (iter == options.max_iter) break;
    std::array<double, 4> step{0.0, 0.0, 0.0, 0.0};
    if (!solve_small(info, score, k, step)) break;
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half, scale *= 0.5) {
      std::array<double, 4> trial = beta;
      for (std::size_t j = 0; j < k; ++j) trial[j] += scale * step[j];
      const double trial_ll = binomial_loglik(d, level, trial);
      if (std::isfinite(trial_ll) && trial_ll >= ll - 1e-12 * std::abs(ll)) {
        beta = trial;
        ll = trial_ll;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  coef.tau = beta;
  out.coefficients = coef;
  out.fit.converged = converged;
  out.fit.iterations = iter;
  out.fit.loglik = ll;
  out.fit.expected.assign(table.num_cells(), 0.0);
  for (std::size_t a = 0; a < table.axes().num_abilities(); ++a)
    for (std::size_t g = 0; g < 2; ++g) {
      const std::size_t i = a * 2 + g;
      const auto x = design_row(level, d.a[i], d.g[i]);
      double eta = 0.0;
      for (std::size_t j = 0; j < k; ++j) eta += x[j] * beta[j];
      const double p = sigmoid(eta);
      out.fit.expected[table.index(a, g, 1)] = d.m[i] * p;
      out.fit.expected[table.index(a, g, 0)] = d.m[i] * (1.0 - p);
    }
  return out;
}

double g_statistic(std::span<const double> observed, std::span<const double> fitted) {
  if (observed.size() != fitted.size()) throw InvalidArgument("G statistic: length mismatch");
  double g = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(fitted[i] > 0.0)) throw InvalidArgument("G statistic: fitted value not positive");
    if (observed[i] > 0.0) g += observed[i] * std::log(observed[i] / fitted[i]);
  }
  return std::max(0.0, 2.0 * g);
}

double pearson_x2(std::span<const double> observed, std::span<const double> fitted) {
  if (observed.size() != fitted.size()) throw InvalidArgument("X2 statistic: length mismatch");
  double x2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(fitted[i] > 0.0)) throw InvalidArgument("X2 statistic: fitted value not positive");
    const double d = observed[i] - fitted[i];
    x2 += d * d / fitted[i];
  }
  return x2;
}

double chisq_tail(double x, int df) {
  if (x < 0.0 || std::isnan(x)) throw InvalidArgument("chi-square statistic must be nonnegative");
  if (df < 0) throw InvalidArgument("degrees of freedom must be nonnegative");
  if (df == 0) return x > 1e-8 ? 0.0 : 1.0;
  if (x == 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

int degrees_of_freedom(const ModelFamily& family, const AxisSpec& axes) {
  axes.validate();
  const int na = static_cast<int>(axes.num_abilities());
  const int ng = 2;
  const int nr = static_cast<int>(axes.num_responses());
  switch (family.kind) {
    case FamilyKind::loglinear: {
      if (family.facets == ModelFamily::loglinear(family.level).facets) {
        switch (family.level) {
          case Level::cond_indep: return na * (ng - 1) * (nr - 1);
          case Level::no3way: return (na - 1) * (ng - 1) * (nr - 1);
          case Level::full: return 0;
        }
      }
      const auto config = configuration(family, axes);
      return static_cast<int>(config.cols() - rank(IntegerMatrix::from(config)));
    }
    case FamilyKind::logistic:
      if (!axes.dichotomous()) throw InvalidArgument("logistic models need a dichotomous response");
      switch (family.level) {
        case Level::cond_indep: return na * ng - 2;
        case Level::no3way: return na * ng - 3;
        case Level::full: return na * ng - 4;
      }
      break;
    case FamilyKind::cmh:
      if (!axes.dichotomous()) throw InvalidArgument("CMH models need a dichotomous response");
      if (family.level == Level::cond_indep) return na;
      if (family.level == Level::no3way) return na * ng - (na + 1);
      break;
  }
  throw InvalidArgument("no degrees-of-freedom formula for " + family.name());
}

HeuristicResult heuristic_check(const MleFit& fit) {
  if (fit.expected.empty()) throw InvalidArgument("heuristic check on an empty fit");
  std::size_t hits = 0;
  bool any_positive = false;
  for (double v : fit.expected) {
    if (v >= 5.0) ++hits;
    if (v > 0.0) any_positive = true;
  }
  if (!any_positive) throw InvalidArgument("heuristic check on an all-zero fit");
  HeuristicResult h;
  h.pct_ge5 = static_cast<double>(hits) / static_cast<double>(fit.expected.size());
  h.met = hits * 5 >= fit.expected.size() * 4;
  return h;
}

GofResult goodness_of_fit(const ContingencyTable& table, const MleFit& fit, int df) {
  std::vector<double> obs(table.natural_counts().begin(), table.natural_counts().end());
  GofResult r;
  r.g_stat = g_statistic(obs, fit.expected);
  r.pearson_x2 = pearson_x2(obs, fit.expected);
  r.df = df;
  r.p_value = chisq_tail(r.g_stat, df);
  const HeuristicResult h = heuristic_check(fit);
  r.pct_expected_ge5 = h.pct_ge5;
  r.heuristic_met = h.met;
  return r;
}

AsymptoticResult asymptotic_test(const ContingencyTable& table, const ModelFamily& family) {
  AsymptoticResult out;
  ModelFamily fam = family;
  if (fam.kind == FamilyKind::cmh) {
    if (!table.axes().dichotomous()) throw InvalidArgument("CMH models need a dichotomous response");
    fam = ModelFamily::loglinear(family.level);
  }
  const int df = degrees_of_freedom(family, table.axes());
  out.existence = mle_exists(table, fam);
  if (!out.existence.exists) return out;
  if (fam.kind == FamilyKind::logistic) {
    LogisticFit lf = irls_logistic(table, fam.level);
    out.coefficients = lf.coefficients;
    out.fit = std::move(lf.fit);
  } else if (fam.facets == ModelFamily::loglinear(Level::cond_indep).facets) {
    out.fit = mle_closedform_c(table);
  } else if (fam.facets.size() == 1 && fam.facets[0].full()) {
    MleFit saturated;
    saturated.expected.assign(table.natural_counts().begin(), table.natural_counts().end());
    saturated.converged = true;
    saturated.loglik = multinomial_loglik(table.natural_counts(), saturated.expected);
    out.fit = std::move(saturated);
  } else {
    out.fit = ipf_fit(table, fam.facets);
  }
  bool positive = true;
  for (double v : out.fit->expected)
    if (!(v > 0.0)) positive = false;
  if (out.fit->converged && positive) out.gof = goodness_of_fit(table, *out.fit, df);
  return out;
}

}  // namespace exactdif
