#include "exactdif/oracle.hpp"

#include <cmath>
#include <limits>

#include "exactdif/error.hpp"
#include "exactdif/logfact.hpp"
#include "exactdif/sampler.hpp"

namespace exactdif {
namespace {

// Cell-by-cell search with per-row remaining budgets. A cell that closes a
// row is forced; every other cell is bounded above by the tightest covering
// row and below by what the later cells of each row can still absorb.
class FiberSearch {
 public:
  FiberSearch(const ConfigurationMatrix& config, std::span<const Count> stats)
      : n_(config.cols()), budget_(stats.begin(), stats.end()), state_(config.cols(), 0) {
    if (stats.size() != config.rows())
      throw InvalidArgument("statistic vector length does not match the configuration");
    for (Count s : stats)
      if (s < 0) throw InvalidArgument("sufficient statistics must be nonnegative");
    cols_.resize(n_);
    closes_.assign(n_, {});
    std::vector<std::size_t> last(config.rows(), n_);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t i = 0; i < config.rows(); ++i)
        if (config(i, j) > 0) {
          cols_[j].push_back({i, config(i, j)});
          last[i] = j;
        }
    for (std::size_t i = 0; i < config.rows(); ++i) {
      if (last[i] == n_) {
        if (stats[i] != 0) infeasible_ = true;
        continue;
      }
      closes_[last[i]].push_back(i);
    }
    // Static per-cell upper bounds and suffix capacities per row.
    std::vector<Count> ub(n_, std::numeric_limits<Count>::max());
    for (std::size_t j = 0; j < n_; ++j)
      for (auto [i, a] : cols_[j]) ub[j] = std::min(ub[j], stats[i] / a);
    tail_capacity_.assign(n_, {});
    std::vector<Count> running(config.rows(), 0);
    for (std::size_t j = n_; j-- > 0;) {
      for (auto [i, a] : cols_[j]) tail_capacity_[j].push_back(running[i]);
      for (auto [i, a] : cols_[j]) running[i] += a * ub[j];
    }
  }

  template <class Visit>
  void run(Visit&& visit) {
    if (infeasible_) return;
    stop_ = false;
    descend(0, visit);
  }

  const std::vector<Count>& state() const { return state_; }

 private:
  struct Entry {
    std::size_t row;
    Count coef;
  };

  template <class Visit>
  void descend(std::size_t j, Visit& visit) {
    if (j == n_) {
      if (!visit(state_)) stop_ = true;
      return;
    }
    Count lo = 0, hi = std::numeric_limits<Count>::max();
    const auto& col = cols_[j];
    for (std::size_t k = 0; k < col.size(); ++k) {
      const auto [i, a] = col[k];
      hi = std::min(hi, budget_[i] / a);
      const Count excess = budget_[i] - tail_capacity_[j][k];
      if (excess > 0) lo = std::max(lo, (excess + a - 1) / a);
    }
    for (std::size_t i : closes_[j]) {
      Count a = 0;
      for (const auto& e : col)
        if (e.row == i) a = e.coef;
      if (budget_[i] % a != 0) return;
      const Count forced = budget_[i] / a;
      lo = std::max(lo, forced);
      hi = std::min(hi, forced);
    }
    if (lo > hi) return;
    Count x = lo;
    for (auto [i, a] : col) budget_[i] -= a * x;
    for (;;) {
      state_[j] = x;
      descend(j + 1, visit);
      if (stop_ || x == hi) break;
      for (auto [i, a] : col) budget_[i] -= a;
      ++x;
    }
    for (auto [i, a] : col) budget_[i] += a * x;
    state_[j] = 0;
  }

  std::size_t n_;
  std::vector<Count> budget_;
  std::vector<Count> state_;
  std::vector<std::vector<Entry>> cols_;
  std::vector<std::vector<std::size_t>> closes_;
  std::vector<std::vector<Count>> tail_capacity_;
  bool infeasible_ = false;
  bool stop_ = false;
};

}  // namespace

std::uint64_t for_each_in_fiber(const ConfigurationMatrix& config, std::span<const Count> stats,
                                const std::function<bool(std::span<const Count>)>& visit) {
  FiberSearch search(config, stats);
  std::uint64_t visited = 0;
  search.run([&](const std::vector<Count>& v) {
    ++visited;
    return visit(std::span<const Count>(v));
  });
  return visited;
}

FiberEnumeration enumerate_fiber(const ConfigurationMatrix& config, std::span<const Count> stats,
                                 std::optional<std::uint64_t> cap, bool keep_tables) {
  FiberSearch search(config, stats);
  FiberEnumeration out;
  std::uint64_t seen = 0;
  search.run([&](const std::vector<Count>& v) {
    if (cap && seen == *cap) {
      out.truncated = true;
      return false;
    }
    ++seen;
    if (keep_tables) out.tables.push_back(v);
    return true;
  });
  out.count = seen;
  return out;
}

BigInt fiber_count(const ConfigurationMatrix& config, std::span<const Count> stats,
                   std::optional<std::uint64_t> cap) {
  FiberEnumeration e = enumerate_fiber(config, stats, cap, false);
  if (e.truncated)
    throw EnumerationTruncated("fiber has more than " + std::to_string(*cap) +
                               " tables; raise or remove the cap");
  return e.count;
}

double exhaustive_pvalue(const ConfigurationMatrix& config, std::span<const Count> observed,
                         std::optional<std::uint64_t> cap) {
  const std::vector<Count> stats = config.apply(observed);
  const double threshold = log_uprob(observed) + kTieTolerance;
  FiberSearch search(config, stats);
  // Running log-sum-exp, scaled by a common maximum.
  double max_lu = -std::numeric_limits<double>::infinity();
  double total = 0.0, tail = 0.0;
  std::uint64_t seen = 0;
  bool truncated = false;
  search.run([&](const std::vector<Count>& v) {
    if (cap && seen == *cap) {
      truncated = true;
      return false;
    }
    ++seen;
    const double lu = log_uprob(std::span<const Count>(v));
    if (lu > max_lu) {
      const double scale = std::exp(max_lu - lu);
      total *= scale;
      tail *= scale;
      max_lu = lu;
    }
    const double w = std::exp(lu - max_lu);
    total += w;
    if (lu <= threshold) tail += w;
    return true;
  });
  if (truncated)
    throw EnumerationTruncated("fiber has more than " + std::to_string(*cap) +
                               " tables; raise or remove the cap");
  if (seen == 0) throw InvalidArgument("observed table is not in a nonempty fiber");
  return tail / total;
}

}  // namespace exactdif
