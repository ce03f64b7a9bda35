#include "exactdif/intlinalg.hpp"

#include <limits>
#include <utility>

#include "exactdif/error.hpp"

namespace exactdif {
namespace {

// g = x*a + y*b, g >= 0
BigInt ext_gcd(const BigInt& a, const BigInt& b, BigInt& x, BigInt& y) {
  BigInt old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    BigInt q = old_r / r;
    BigInt tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  x = old_s;
  y = old_t;
  return old_r;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
  return q;
}

// Replace rows (i, k) of `m` by (x*ri + y*rk, p*ri + q*rk).
void combine_rows(IntegerMatrix& m, std::size_t i, std::size_t k, const BigInt& x, const BigInt& y,
                  const BigInt& p, const BigInt& q) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    BigInt ri = m(i, c), rk = m(k, c);
    m(i, c) = x * ri + y * rk;
    m(k, c) = p * ri + q * rk;
  }
}

void add_multiple(IntegerMatrix& m, std::size_t dst, std::size_t src, const BigInt& f) {
  if (f == 0) return;
  for (std::size_t c = 0; c < m.cols(); ++c) m(dst, c) += f * m(src, c);
}

void negate_row(IntegerMatrix& m, std::size_t i) {
  for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = -m(i, c);
}

std::int64_t dot(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

IntegerMatrix IntegerMatrix::identity(std::size_t n) {
  IntegerMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntegerMatrix IntegerMatrix::from(const ConfigurationMatrix& config) {
  IntegerMatrix m(config.rows(), config.cols());
  for (std::size_t i = 0; i < config.rows(); ++i)
    for (std::size_t j = 0; j < config.cols(); ++j) m(i, j) = config(i, j);
  return m;
}

IntegerMatrix IntegerMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  IntegerMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InvalidArgument("ragged integer matrix");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntegerMatrix IntegerMatrix::transpose() const {
  IntegerMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

IntegerMatrix IntegerMatrix::operator*(const IntegerMatrix& o) const {
  if (cols_ != o.rows_) throw InvalidArgument("matrix product shape mismatch");
  IntegerMatrix p(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const BigInt& a = (*this)(i, k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < o.cols_; ++j) p(i, j) += a * o(k, j);
    }
  return p;
}

HermiteForm hnf(const IntegerMatrix& m) {
  HermiteForm out{m, IntegerMatrix::identity(m.rows()), 0};
  IntegerMatrix& h = out.h;
  IntegerMatrix& u = out.u;
  std::size_t pr = 0;
  for (std::size_t col = 0; col < h.cols() && pr < h.rows(); ++col) {
    for (std::size_t i = pr + 1; i < h.rows(); ++i) {
      if (h(i, col) == 0) continue;
      const BigInt a = h(pr, col), b = h(i, col);
      BigInt x, y;
      const BigInt g = ext_gcd(a, b, x, y);
      const BigInt p = -b / g, q = a / g;
      combine_rows(h, pr, i, x, y, p, q);
      combine_rows(u, pr, i, x, y, p, q);
    }
    if (h(pr, col) == 0) continue;
    if (h(pr, col) < 0) {
      negate_row(h, pr);
      negate_row(u, pr);
    }
    for (std::size_t i = 0; i < pr; ++i) {
      const BigInt f = -floor_div(h(i, col), h(pr, col));
      add_multiple(h, i, pr, f);
      add_multiple(u, i, pr, f);
    }
    ++pr;
  }
  out.rank = pr;
  return out;
}

std::size_t rank(const IntegerMatrix& m) { return hnf(m).rank; }

std::vector<std::vector<std::int64_t>> kernel_lattice(const IntegerMatrix& m) {
  // U * M^T = H; the rows of U paired with zero rows of H span ker(M).
  const HermiteForm f = hnf(m.transpose());
  std::vector<std::vector<std::int64_t>> basis;
  const auto lo = BigInt(std::numeric_limits<std::int64_t>::min());
  const auto hi = BigInt(std::numeric_limits<std::int64_t>::max());
  for (std::size_t i = f.rank; i < f.u.rows(); ++i) {
    std::vector<std::int64_t> v(f.u.cols());
    for (std::size_t j = 0; j < v.size(); ++j) {
      const BigInt& x = f.u(i, j);
      if (x < lo || x > hi) throw BasisTooLarge("kernel basis entry does not fit in 64 bits");
      v[j] = static_cast<std::int64_t>(x);
    }
    basis.push_back(std::move(v));
  }
  // Pairwise size reduction: v_i -= round(<v_i,v_j>/<v_j,v_j>) v_j while the
  // norm strictly drops. Unimodular, so the span is unchanged.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = 0; j < basis.size(); ++j) {
        if (i == j) continue;
        const std::int64_t nj = dot(basis[j], basis[j]);
        const std::int64_t ij = dot(basis[i], basis[j]);
        if (nj == 0 || 2 * std::abs(ij) <= nj) continue;
        const double qd = static_cast<double>(ij) / static_cast<double>(nj);
        const auto q = static_cast<std::int64_t>(qd >= 0 ? qd + 0.5 : qd - 0.5);
        if (q == 0) continue;
        const std::int64_t before = dot(basis[i], basis[i]);
        std::vector<std::int64_t> cand = basis[i];
        for (std::size_t k = 0; k < cand.size(); ++k) cand[k] -= q * basis[j][k];
        if (dot(cand, cand) < before) {
          basis[i] = std::move(cand);
          changed = true;
        }
      }
  }
  return basis;
}

std::vector<std::vector<std::int64_t>> kernel_lattice(const ConfigurationMatrix& config) {
  return kernel_lattice(IntegerMatrix::from(config));
}

}  // namespace exactdif
