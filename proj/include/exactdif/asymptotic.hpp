#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactdif/config.hpp"
#include "exactdif/table.hpp"

namespace exactdif {

/// Fitted expected counts in the natural (a, g, r) layout of the table.
struct MleFit {
  std::vector<double> expected;
  bool converged = false;
  int iterations = 0;
  /// Multinomial (log-linear) or binomial (logistic) log-likelihood at the fit.
  double loglik = 0.0;
};

struct GofResult {
  double g_stat = 0.0;
  double pearson_x2 = 0.0;
  int df = 0;
  double p_value = 1.0;  ///< chisq_tail(g_stat, df)
  bool heuristic_met = false;
  double pct_expected_ge5 = 0.0;  ///< in [0, 1]
};

/// tau0 + tau1*a + tau2*g + tau3*a*g; entries beyond the level's design are 0.
struct LogisticCoefficients {
  Level level = Level::cond_indep;
  std::array<double, 4> tau{0.0, 0.0, 0.0, 0.0};
  std::size_t size() const { return level == Level::cond_indep ? 2 : level == Level::no3way ? 3 : 4; }
};

enum class ExistenceReason { ok, zero_marginal, separation, collapsing_failure };
std::string to_string(ExistenceReason reason);

struct ExistenceReport {
  bool exists = true;
  ExistenceReason reason = ExistenceReason::ok;
  std::string witness;  ///< human-readable
  /// collapsing_failure: bit a set iff ability index a goes to block 1;
  /// likewise for response indices.
  std::uint64_t ability_block = 0;
  std::uint64_t response_block = 0;
  /// separation: eta = beta . (1, a, g, a*g). Cells with eta > 0 have no
  /// response-0 count and cells with eta < 0 have no response-1 count.
  std::array<std::int64_t, 4> beta{0, 0, 0, 0};
};

// ---- fitting ----

struct IpfOptions {
  double tol = 1e-8;  ///< max absolute facet-marginal discrepancy
  int max_cycles = 10000;
};

struct IrlsOptions {
  double tol = 1e-8;  ///< Euclidean norm of the score
  int max_iter = 100;
};

/// nu(a,g,r) = n(a,g,+) n(a,+,r) / n(a,+,+). Throws MleNonexistent on a zero
/// n(a,g,+) or n(a,+,r).
MleFit mle_closedform_c(const ContingencyTable& table);

/// Iterative proportional fitting to the given facet marginals, starting
/// from the uniform table. Non-convergence is reported via `converged`.
MleFit ipf_fit(const ContingencyTable& table, const std::vector<AxisSet>& facets,
               const IpfOptions& options = {});

struct LogisticFit {
  LogisticCoefficients coefficients;
  MleFit fit;
};

/// Newton-Raphson (IRLS) with step halving on the grouped binomial
/// likelihood. Response index 1 is the success level. Throws MleNonexistent
/// when a group-ability cell is empty or the data are separated.
LogisticFit irls_logistic(const ContingencyTable& table, Level level,
                          const IrlsOptions& options = {});

// ---- statistics ----

/// 2 sum n ln(n / nu) with 0 ln 0 = 0. Throws InvalidArgument if some
/// fitted value is not positive.
double g_statistic(std::span<const double> observed, std::span<const double> fitted);
double pearson_x2(std::span<const double> observed, std::span<const double> fitted);

/// Upper tail of the chi-square distribution, Q(df/2, x/2).
double chisq_tail(double x, int df);

/// Residual degrees of freedom of the absolute goodness-of-fit test.
int degrees_of_freedom(const ModelFamily& family, const AxisSpec& axes);

struct HeuristicResult {
  double pct_ge5 = 0.0;
  bool met = false;
};
/// Share of fitted cells >= 5; met when at least 80%.
HeuristicResult heuristic_check(const MleFit& fit);

// ---- existence ----

ExistenceReport mle_exists_loglinear(const ContingencyTable& table, Level level);

/// True when collapsing abilities and responses by the two masks yields a
/// 2x2x2 table with zeros of both parities (no positive table with the same
/// two-way margins).
bool collapsing_blocks_mle(const ContingencyTable& table, std::uint64_t ability_block,
                           std::uint64_t response_block);

ExistenceReport detect_separation(const ContingencyTable& table, Level level);

/// Checks a separation witness against the table.
bool separates(const ContingencyTable& table, const std::array<std::int64_t, 4>& beta);

/// Empty ability-group cells, then separation.
ExistenceReport mle_exists_logistic(const ContingencyTable& table, Level level);

/// Dispatch on the family: log-linear or logistic (CMH uses the equivalent
/// log-linear model).
ExistenceReport mle_exists(const ContingencyTable& table, const ModelFamily& family);

// ---- end to end ----

struct AsymptoticResult {
  ExistenceReport existence;
  std::optional<MleFit> fit;
  std::optional<GofResult> gof;
  std::optional<LogisticCoefficients> coefficients;
};

/// Existence check, then fit and chi-square test when the MLE exists.
AsymptoticResult asymptotic_test(const ContingencyTable& table, const ModelFamily& family);

/// Statistic summary for an already fitted model.
GofResult goodness_of_fit(const ContingencyTable& table, const MleFit& fit, int df);

}  // namespace exactdif
