#pragma once
// Independent reference implementations used only by the tests.

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "exactdif/config.hpp"
#include "exactdif/markov.hpp"
#include "exactdif/oracle.hpp"

namespace oracle {

using exactdif::Count;

// Dense two-phase simplex with Bland's rule: max c.x s.t. A x = b, x >= 0.
// Returns nullopt when infeasible. Good enough for the tiny LPs below.
inline std::optional<double> lp_max(std::vector<std::vector<double>> A, std::vector<double> b,
                                    const std::vector<double>& c) {
  const double eps = 1e-9;
  const std::size_t m = A.size(), n = c.size();
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < 0) {
      for (double& x : A[i]) x = -x;
      b[i] = -b[i];
    }
  // Tableau with artificials n..n+m-1.
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  auto pivot = [&](std::size_t r, std::size_t col) {
    const double p = T[r][col];
    for (double& x : T[r]) x /= p;
    for (std::size_t i = 0; i <= m; ++i)
      if (i != r && std::abs(T[i][col]) > 0) {
        const double f = T[i][col];
        for (std::size_t j = 0; j < cols; ++j) T[i][j] -= f * T[r][j];
      }
    basis[r] = col;
  };
  auto run = [&](std::size_t allowed) {
    for (;;) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < allowed; ++j)
        if (T[m][j] < -eps) {
          enter = j;
          break;
        }
      if (enter == cols) return true;
      std::size_t leave = m;
      double best = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (T[i][enter] > eps) {
          const double ratio = T[i][cols - 1] / T[i][enter];
          if (leave == m || ratio < best - eps ||
              (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
            leave = i;
            best = ratio;
          }
        }
      if (leave == m) return false;  // unbounded
      pivot(leave, enter);
    }
  };
  // Phase 1: minimize the sum of artificials.
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += T[i][j];
    T[m][j] = (j >= n && j < n + m) ? 0.0 : -s;
  }
  run(n + m);
  if (T[m][cols - 1] < -1e-7) return std::nullopt;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n)
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(T[i][j]) > eps) {
          pivot(i, j);
          break;
        }
  // Phase 2.
  std::fill(T[m].begin(), T[m].end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) T[m][j] = -c[j];
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n && c[basis[i]] != 0) {
      const double f = T[m][basis[i]];
      for (std::size_t j = 0; j < cols; ++j) T[m][j] -= f * T[i][j];
    }
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) T[i][basis[i]] = 0.0;  // freeze leftover artificials
  if (!run(n)) return 1e300;
  return T[m][cols - 1];
}

// The MLE of a discrete exponential family with configuration A exists iff
// some strictly positive y has A y = A n. LP: max t, y >= t, t <= 1.
inline bool mle_exists_lp(const exactdif::ConfigurationMatrix& config, const std::vector<Count>& n) {
  const std::size_t k = config.cols(), rows = config.rows();
  const auto stats = config.apply(n);
  // variables: y (k), t, s (k), w
  const std::size_t nv = 2 * k + 2;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t j = 0; j < k; ++j) row[j] = static_cast<double>(config(i, j));
    A.push_back(row);
    b.push_back(static_cast<double>(stats[i]));
  }
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> row(nv, 0.0);
    row[j] = 1.0;
    row[k] = -1.0;
    row[k + 1 + j] = -1.0;
    A.push_back(row);
    b.push_back(0.0);
  }
  std::vector<double> row(nv, 0.0);
  row[k] = 1.0;
  row[nv - 1] = 1.0;
  A.push_back(row);
  b.push_back(1.0);
  std::vector<double> c(nv, 0.0);
  c[k] = 1.0;
  const auto best = lp_max(A, b, c);
  return best && *best > 1e-7;
}

// Fiber size of the log-linear conditional-independence model for a
// dichotomous table: the fiber factors into one 2x2 table per ability level.
inline std::uint64_t count_c_fiber_dichotomous(const exactdif::ContingencyTable& t) {
  std::uint64_t total = 1;
  for (std::size_t a = 0; a < t.axes().num_abilities(); ++a) {
    const Count g0 = t.at(a, 0, 0) + t.at(a, 0, 1);
    const Count g1 = t.at(a, 1, 0) + t.at(a, 1, 1);
    const Count r0 = t.at(a, 0, 0) + t.at(a, 1, 0);
    const Count lo = std::max<Count>(0, r0 - g1), hi = std::min(g0, r0);
    total *= static_cast<std::uint64_t>(hi - lo + 1);
  }
  return total;
}

// No-three-way fiber for a dichotomous table: within each ability slice the
// only freedom is x_a = n(a,0,0), and sum_a x_a is fixed. DP over a.
inline std::uint64_t count_no3w_fiber_dichotomous(const exactdif::ContingencyTable& t) {
  Count target = 0;
  std::map<Count, std::uint64_t> ways{{0, 1}};
  for (std::size_t a = 0; a < t.axes().num_abilities(); ++a) {
    const Count g0 = t.at(a, 0, 0) + t.at(a, 0, 1);
    const Count g1 = t.at(a, 1, 0) + t.at(a, 1, 1);
    const Count r0 = t.at(a, 0, 0) + t.at(a, 1, 0);
    const Count lo = std::max<Count>(0, r0 - g1), hi = std::min(g0, r0);
    target += t.at(a, 0, 0);
    std::map<Count, std::uint64_t> next;
    for (const auto& [s, w] : ways)
      for (Count x = lo; x <= hi; ++x) next[s + x] += w;
    ways.swap(next);
  }
  return ways[target];
}

// Connected components of the fiber graph whose edges are +-moves.
inline bool fiber_connected(const std::vector<std::vector<Count>>& fiber,
                            const std::vector<exactdif::Move>& moves) {
  if (fiber.size() <= 1) return true;
  std::map<std::vector<Count>, bool> seen;
  for (const auto& t : fiber) seen[t] = false;
  std::deque<std::vector<Count>> q{fiber.front()};
  seen[fiber.front()] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    const auto cur = q.front();
    q.pop_front();
    for (const auto& mv : moves)
      for (int sgn : {1, -1}) {
        std::vector<Count> nb = cur;
        bool ok = true;
        for (std::size_t i = 0; i < nb.size() && ok; ++i) {
          nb[i] += sgn * mv[i];
          ok = nb[i] >= 0;
        }
        if (!ok) continue;
        auto it = seen.find(nb);
        if (it != seen.end() && !it->second) {
          it->second = true;
          ++reached;
          q.push_back(std::move(nb));
        }
      }
  }
  return reached == fiber.size();
}

// Upper tail of chi-square via the finite Poisson sum (even df) or erfc
// plus a finite series (odd df).
inline double chisq_tail_closed(double x, int df) {
  const double h = x / 2.0;
  if (df % 2 == 0) {
    double term = 1.0, sum = 0.0;
    for (int j = 0; j < df / 2; ++j) {
      if (j > 0) term *= h / j;
      sum += term;
    }
    return std::exp(-h) * sum;
  }
  double sum = std::erfc(std::sqrt(h));
  // terms e^{-h} h^{j+1/2} / Gamma(j + 3/2)
  double term = std::exp(-h) * std::sqrt(h) / std::tgamma(1.5);
  for (int j = 0; j <= (df - 3) / 2; ++j) {
    sum += term;
    term *= h / (j + 1.5);
  }
  return sum;
}

}  // namespace oracle
