#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exactdif/basis_cache.hpp"
#include "exactdif/config.hpp"
#include "exactdif/markov.hpp"
#include "exactdif/table.hpp"

namespace exactdif {

struct WalkConfig {
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 1000;
  std::int64_t thinning = 10;
  std::uint64_t seed = 0;

  void validate() const;
  /// floor((iterations - burn_in) / thinning)
  std::int64_t n_kept() const { return (iterations - burn_in) / thinning; }
};

struct WalkResult {
  std::vector<double> sampled_loguprobs;  ///< one per kept state
  double acceptance_rate = 0.0;           ///< accepted / proposed, over all steps
  std::int64_t n_kept = 0;
  std::uint64_t seed = 0;
  std::vector<Count> final_state;  ///< canonical cell order
};

enum class StatisticKind { probability_rank };
std::string to_string(StatisticKind kind);

struct ExactTestResult {
  double p_value = 1.0;
  double mc_stderr = 0.0;
  StatisticKind statistic_kind = StatisticKind::probability_rank;
  BasisKind basis_kind = BasisKind::markov;
  std::int64_t n_kept = 0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  double observed_loguprob = 0.0;
  std::size_t num_moves = 0;
};

/// Ties within this distance on the log scale count as "at most as likely".
inline constexpr double kTieTolerance = 1e-9;

/// Metropolis-Hastings walk on the fiber of `start` (canonical cell order).
/// Each step draws a move and a sign uniformly; proposals leaving the
/// nonnegative orthant are rejected; the rest are accepted with probability
/// min(1, exp(delta log_uprob)).
WalkResult metropolis_walk(std::span<const Count> start, const MarkovBasis& basis,
                           const WalkConfig& cfg);
WalkResult metropolis_walk(const ContingencyTable& start, const MarkovBasis& basis,
                           const WalkConfig& cfg);

ExactTestResult exact_pvalue(const WalkResult& walk, double observed_loguprob,
                             BasisKind basis_kind = BasisKind::markov);

struct ExactTestOptions {
  BasisCache cache = BasisCache::from_environment();
  /// Use the lattice fallback when the Groebner computation exceeds its caps.
  bool allow_lattice = false;
  GroebnerLimits limits;
};

/// configuration -> Markov basis (cached) -> walk -> p-value.
ExactTestResult exact_test(const ContingencyTable& table, const ModelFamily& family,
                           const WalkConfig& cfg, const ExactTestOptions& options = {});

}  // namespace exactdif
