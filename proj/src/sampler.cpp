#include "exactdif/sampler.hpp"

#include <cmath>

#include "exactdif/error.hpp"
#include "exactdif/logfact.hpp"
#include "exactdif/rng.hpp"

namespace exactdif {

void WalkConfig::validate() const {
  if (burn_in < 0) throw InvalidArgument("burn-in must be nonnegative");
  if (iterations <= burn_in) throw InvalidArgument("iterations must exceed burn-in");
  if (thinning < 1) throw InvalidArgument("thinning must be at least 1");
}

std::string to_string(StatisticKind) { return "probability_rank"; }

namespace {

struct SparseMove {
  std::vector<std::uint32_t> index;
  std::vector<Count> delta;
};

}  // namespace

WalkResult metropolis_walk(std::span<const Count> start, const MarkovBasis& basis,
                           const WalkConfig& cfg) {
  cfg.validate();
  if (!basis.moves.empty() && basis.num_cells != start.size())
    throw InvalidArgument("Markov basis has " + std::to_string(basis.num_cells) +
                          " cells but the table has " + std::to_string(start.size()));
  for (Count c : start)
    if (c < 0) throw InvalidArgument("walk start has a negative cell");

  std::vector<SparseMove> moves;
  moves.reserve(basis.moves.size());
  for (const auto& m : basis.moves) {
    if (m.size() != start.size()) throw InvalidArgument("Markov move has the wrong length");
    SparseMove s;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] != 0) {
        s.index.push_back(static_cast<std::uint32_t>(i));
        s.delta.push_back(m[i]);
      }
    moves.push_back(std::move(s));
  }

  WalkResult out;
  out.seed = cfg.seed;
  out.n_kept = cfg.n_kept();
  out.sampled_loguprobs.reserve(static_cast<std::size_t>(out.n_kept));
  std::vector<Count> state(start.begin(), start.end());
  Rng rng(cfg.seed);
  std::int64_t accepted = 0;

  for (std::int64_t step = 1; step <= cfg.iterations; ++step) {
    if (!moves.empty()) {
      const SparseMove& m = moves[rng.below(moves.size())];
      const Count sign = (rng.next() >> 63) ? 1 : -1;
      bool feasible = true;
      double delta = 0.0;
      for (std::size_t k = 0; k < m.index.size(); ++k) {
        const Count old = state[m.index[k]];
        const Count now = old + sign * m.delta[k];
        if (now < 0) {
          feasible = false;
          break;
        }
        delta += log_factorial(old) - log_factorial(now);
      }
      if (feasible) {
        const double u = rng.uniform();
        if (delta >= 0.0 || u < std::exp(delta)) {
          for (std::size_t k = 0; k < m.index.size(); ++k) state[m.index[k]] += sign * m.delta[k];
          ++accepted;
        }
      }
    }
    if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0)
      out.sampled_loguprobs.push_back(log_uprob(state));
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.iterations);
  out.final_state = std::move(state);
  return out;
}

WalkResult metropolis_walk(const ContingencyTable& start, const MarkovBasis& basis,
                           const WalkConfig& cfg) {
  const auto v = to_canonical(start);
  return metropolis_walk(std::span<const Count>(v), basis, cfg);
}

ExactTestResult exact_pvalue(const WalkResult& walk, double observed_loguprob,
                             BasisKind basis_kind) {
  if (walk.sampled_loguprobs.empty()) throw InvalidArgument("walk kept no samples");
  std::size_t hits = 0;
  for (double x : walk.sampled_loguprobs)
    if (x <= observed_loguprob + kTieTolerance) ++hits;
  ExactTestResult r;
  r.n_kept = static_cast<std::int64_t>(walk.sampled_loguprobs.size());
  r.p_value = static_cast<double>(hits) / static_cast<double>(r.n_kept);
  r.mc_stderr = std::sqrt(r.p_value * (1.0 - r.p_value) / static_cast<double>(r.n_kept));
  r.basis_kind = basis_kind;
  r.acceptance_rate = walk.acceptance_rate;
  r.seed = walk.seed;
  r.observed_loguprob = observed_loguprob;
  return r;
}

ExactTestResult exact_test(const ContingencyTable& table, const ModelFamily& family,
                           const WalkConfig& cfg, const ExactTestOptions& options) {
  cfg.validate();
  const ConfigurationMatrix config = configuration(family, table.axes());
  const MarkovBasis basis =
      cached_markov_basis(config, options.cache, options.allow_lattice, options.limits);
  const auto start = to_canonical(table);
  const WalkResult walk = metropolis_walk(std::span<const Count>(start), basis, cfg);
  ExactTestResult r = exact_pvalue(walk, log_uprob(table), basis.kind);
  r.num_moves = basis.moves.size();
  return r;
}

}  // namespace exactdif
