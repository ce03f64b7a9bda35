#include "exactdif/markov.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "exactdif/error.hpp"
#include "exactdif/intlinalg.hpp"

namespace exactdif {

Move Binomial::exponent_difference() const {
  Move d(lead.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = lead[i] - trail[i];
  return d;
}

MonomialOrder MonomialOrder::grevlex(std::size_t num_vars) {
  MonomialOrder o;
  o.priority.resize(num_vars);
  std::iota(o.priority.begin(), o.priority.end(), 0);
  return o;
}

MonomialOrder MonomialOrder::with_lowest(std::size_t var) const {
  MonomialOrder o;
  for (std::size_t v : priority)
    if (v != var) o.priority.push_back(v);
  o.priority.push_back(var);
  return o;
}

int MonomialOrder::compare(const std::vector<std::int64_t>& a,
                           const std::vector<std::int64_t>& b) const {
  const std::int64_t da = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  const std::int64_t db = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  if (da != db) return da < db ? -1 : 1;
  for (auto it = priority.rbegin(); it != priority.rend(); ++it)
    if (a[*it] != b[*it]) return a[*it] < b[*it] ? 1 : -1;
  return 0;
}

std::string to_string(BasisKind kind) { return kind == BasisKind::markov ? "markov" : "lattice"; }

namespace {

using Exp = std::vector<std::int32_t>;

std::uint64_t support_mask(const Exp& e) {
  std::uint64_t m = 0;
  for (std::size_t v = 0; v < e.size(); ++v)
    if (e[v] != 0) m |= std::uint64_t{1} << (v & 63u);
  return m;
}

struct Poly {
  Exp lead, trail;
  std::uint64_t lmask = 0;
};

using Clock = std::chrono::steady_clock;

// Buchberger's algorithm specialised to pure binomials. Common factors in
// the variables flagged in `cancel` are divided out whenever they appear;
// this is valid because the ideal is saturated with respect to them.
class BinomialBuchberger {
 public:
  BinomialBuchberger(std::size_t n, const MonomialOrder& order, std::vector<char> cancel,
                     const GroebnerLimits& limits, std::uint64_t& reductions)
      : n_(n), cancel_(std::move(cancel)), limits_(limits), reductions_(reductions),
        exact_masks_(n <= 64) {
    low_first_.assign(order.priority.rbegin(), order.priority.rend());
  }

  void add_generator(Exp p, Exp q) {
    if (normal_form(p, q)) insert(Poly{std::move(p), std::move(q), 0});
  }

  void run() {
    const auto start = Clock::now();
    while (!queue_.empty()) {
      const Pair pr = queue_.top();
      queue_.pop();
      pending_[pr.j][pr.i] = false;
      if (chain_criterion(pr)) continue;
      if (++reductions_ > limits_.max_reductions)
        throw BasisTooLarge("Groebner basis computation exceeded " +
                            std::to_string(limits_.max_reductions) +
                            " S-pair reductions; use the lattice fallback or raise the limit");
      if ((reductions_ & 255u) == 0 &&
          std::chrono::duration<double>(Clock::now() - start).count() >
              limits_.max_seconds_per_stage)
        throw BasisTooLarge("Groebner basis saturation stage exceeded " +
                            std::to_string(limits_.max_seconds_per_stage) +
                            " s; use the lattice fallback or raise the limit");
      const Poly& a = basis_[pr.i];
      const Poly& b = basis_[pr.j];
      Exp p(n_), q(n_);
      for (std::size_t v = 0; v < n_; ++v) {
        const std::int32_t m = std::max(a.lead[v], b.lead[v]);
        p[v] = m - a.lead[v] + a.trail[v];
        q[v] = m - b.lead[v] + b.trail[v];
      }
      if (normal_form(p, q)) insert(Poly{std::move(p), std::move(q), 0});
    }
  }

  /// Minimal, tail-reduced basis.
  std::vector<Poly> reduced() {
    std::vector<Poly> g = basis_;
    for (;;) {
      minimalize(g);
      bool lead_changed = false;
      std::vector<Poly> next;
      next.reserve(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        Poly f = g[i];
        tail_reduce(f.trail, g, i);
        Exp lead_before = f.lead;
        if (!cancel_and_orient(f.lead, f.trail)) {
          lead_changed = true;
          continue;
        }
        if (f.lead != lead_before) lead_changed = true;
        f.lmask = support_mask(f.lead);
        next.push_back(std::move(f));
      }
      g = std::move(next);
      if (!lead_changed) break;
    }
    std::sort(g.begin(), g.end(), [this](const Poly& x, const Poly& y) {
      return compare(x.lead, y.lead) < 0;
    });
    return g;
  }

 private:
  struct Pair {
    std::int64_t degree;
    std::uint64_t seq;
    std::size_t i, j;  // i < j
    bool operator>(const Pair& o) const {
      return degree != o.degree ? degree > o.degree : seq > o.seq;
    }
  };

  int compare(const Exp& a, const Exp& b) const {
    std::int64_t da = 0, db = 0;
    for (std::size_t v = 0; v < n_; ++v) {
      da += a[v];
      db += b[v];
    }
    if (da != db) return da < db ? -1 : 1;
    for (std::size_t v : low_first_)
      if (a[v] != b[v]) return a[v] < b[v] ? 1 : -1;
    return 0;
  }

  bool divides(const Poly& g, const Exp& m, std::uint64_t mmask) const {
    if ((g.lmask & ~mmask) != 0) return false;
    for (std::size_t v = 0; v < n_; ++v)
      if (g.lead[v] > m[v]) return false;
    return true;
  }

  bool cancel_and_orient(Exp& p, Exp& q) const {
    bool equal = true;
    for (std::size_t v = 0; v < n_; ++v) {
      if (cancel_[v]) {
        const std::int32_t c = std::min(p[v], q[v]);
        p[v] -= c;
        q[v] -= c;
      }
      if (p[v] != q[v]) equal = false;
    }
    if (equal) return false;
    if (compare(p, q) < 0) std::swap(p, q);
    return true;
  }

  // Top-reduces x^p - x^q until its leading term is irreducible.
  bool normal_form(Exp& p, Exp& q) const {
    for (;;) {
      if (!cancel_and_orient(p, q)) return false;
      const std::uint64_t pm = support_mask(p);
      const Poly* hit = nullptr;
      for (const Poly& g : basis_)
        if (divides(g, p, pm)) {
          hit = &g;
          break;
        }
      if (!hit) return true;
      for (std::size_t v = 0; v < n_; ++v) p[v] += hit->trail[v] - hit->lead[v];
    }
  }

  void tail_reduce(Exp& t, const std::vector<Poly>& g, std::size_t self) const {
    for (;;) {
      const std::uint64_t tm = support_mask(t);
      const Poly* hit = nullptr;
      for (std::size_t k = 0; k < g.size(); ++k)
        if (k != self && divides(g[k], t, tm)) {
          hit = &g[k];
          break;
        }
      if (!hit) return;
      for (std::size_t v = 0; v < n_; ++v) t[v] += hit->trail[v] - hit->lead[v];
    }
  }

  void minimalize(std::vector<Poly>& g) const {
    std::sort(g.begin(), g.end(), [this](const Poly& x, const Poly& y) {
      return compare(x.lead, y.lead) < 0;
    });
    std::vector<Poly> keep;
    for (Poly& f : g) {
      f.lmask = support_mask(f.lead);
      bool redundant = false;
      for (const Poly& k : keep)
        if (divides(k, f.lead, f.lmask)) {
          redundant = true;
          break;
        }
      if (!redundant) keep.push_back(std::move(f));
    }
    g = std::move(keep);
  }

  bool coprime(const Poly& a, const Poly& b) const {
    if ((a.lmask & b.lmask) == 0) return true;
    if (exact_masks_) return false;
    for (std::size_t v = 0; v < n_; ++v)
      if (a.lead[v] > 0 && b.lead[v] > 0) return false;
    return true;
  }

  bool is_pending(std::size_t i, std::size_t j) const {
    return i < j ? pending_[j][i] : pending_[i][j];
  }

  bool chain_criterion(const Pair& pr) const {
    const Poly& a = basis_[pr.i];
    const Poly& b = basis_[pr.j];
    Exp l(n_);
    for (std::size_t v = 0; v < n_; ++v) l[v] = std::max(a.lead[v], b.lead[v]);
    const std::uint64_t lm = a.lmask | b.lmask;
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      if (k == pr.i || k == pr.j) continue;
      if (!divides(basis_[k], l, lm)) continue;
      if (!is_pending(pr.i, k) && !is_pending(pr.j, k)) return true;
    }
    return false;
  }

  void insert(Poly f) {
    f.lmask = support_mask(f.lead);
    const std::size_t j = basis_.size();
    pending_.emplace_back(j, false);
    for (std::size_t i = 0; i < j; ++i) {
      if (coprime(basis_[i], f)) continue;
      std::int64_t deg = 0;
      for (std::size_t v = 0; v < n_; ++v) deg += std::max(basis_[i].lead[v], f.lead[v]);
      pending_[j][i] = true;
      queue_.push(Pair{deg, seq_++, i, j});
    }
    basis_.push_back(std::move(f));
  }

  std::size_t n_;
  std::vector<char> cancel_;
  GroebnerLimits limits_;
  std::uint64_t& reductions_;
  bool exact_masks_;
  std::vector<std::size_t> low_first_;
  std::vector<Poly> basis_;
  std::vector<std::vector<bool>> pending_;
  std::priority_queue<Pair, std::vector<Pair>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
};

Exp to_exp(std::int64_t x) {
  if (x > std::numeric_limits<std::int32_t>::max() || x < std::numeric_limits<std::int32_t>::min())
    throw BasisTooLarge("lattice vector entry too large for the Groebner engine");
  return Exp{static_cast<std::int32_t>(x)};
}

void split(const std::vector<std::int64_t>& v, Exp& pos, Exp& neg) {
  pos.assign(v.size(), 0);
  neg.assign(v.size(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::int32_t x = to_exp(v[i])[0];
    if (x > 0) pos[i] = x;
    else neg[i] = -x;
  }
}

Move normalized(Move m) {
  for (auto x : m) {
    if (x == 0) continue;
    if (x < 0)
      for (auto& y : m) y = -y;
    break;
  }
  return m;
}

}  // namespace

std::vector<Binomial> toric_groebner(const ConfigurationMatrix& config, const MonomialOrder& order,
                                     const GroebnerLimits& limits) {
  const std::size_t n = config.cols();
  if (order.priority.size() != n) throw InvalidArgument("monomial order has wrong variable count");
  const auto lattice = kernel_lattice(config);
  for (const auto& v : lattice)
    if (std::accumulate(v.begin(), v.end(), std::int64_t{0}) != 0)
      throw InvalidArgument(
          "configuration does not have the all-ones vector in its row space; fibers are not finite");
  if (lattice.empty()) return {};

  std::vector<std::pair<Exp, Exp>> gens;
  for (const auto& v : lattice) {
    Exp p, q;
    split(v, p, q);
    gens.emplace_back(std::move(p), std::move(q));
  }

  // Saturate one variable per stage, pairing variable k with k + n/2. For
  // Lawrence liftings this keeps the intermediate bases far smaller than
  // plain canonical order. A last stage converts to the requested order.
  const std::size_t half = n / 2;
  std::vector<std::size_t> sequence;
  for (std::size_t k = 0; k < half; ++k) {
    sequence.push_back(order.priority[k + half]);
    sequence.push_back(order.priority[k]);
  }
  if (n % 2 == 1) sequence.push_back(order.priority[n - 1]);

  std::uint64_t reductions = 0;
  std::vector<char> cancel(n, 0);
  std::vector<Poly> current;
  auto run_stage = [&](const MonomialOrder& stage_order) {
    BinomialBuchberger engine(n, stage_order, cancel, limits, reductions);
    if (current.empty()) {
      for (auto& [p, q] : gens) engine.add_generator(p, q);
    } else {
      for (auto& f : current) engine.add_generator(f.lead, f.trail);
    }
    engine.run();
    current = engine.reduced();
  };
  for (std::size_t var : sequence) {
    cancel[var] = 1;
    run_stage(order.with_lowest(var));
  }
  run_stage(order);

  std::vector<Binomial> out;
  out.reserve(current.size());
  for (const auto& f : current) {
    Binomial b;
    b.lead.assign(f.lead.begin(), f.lead.end());
    b.trail.assign(f.trail.begin(), f.trail.end());
    out.push_back(std::move(b));
  }
  return out;
}

MarkovBasis markov_basis(const ConfigurationMatrix& config, const GroebnerLimits& limits) {
  MarkovBasis mb;
  mb.fingerprint = config.fingerprint();
  mb.kind = BasisKind::markov;
  mb.num_cells = config.cols();
  std::set<Move> seen;
  for (const auto& b : toric_groebner(config, MonomialOrder::grevlex(config.cols()), limits))
    seen.insert(normalized(b.exponent_difference()));
  mb.moves.assign(seen.begin(), seen.end());
  return mb;
}

MarkovBasis lattice_fallback(const ConfigurationMatrix& config, int depth) {
  MarkovBasis mb;
  mb.fingerprint = config.fingerprint();
  mb.kind = BasisKind::lattice;
  mb.num_cells = config.cols();
  const auto basis = kernel_lattice(config);
  std::set<Move> seen;
  for (const auto& v : basis) seen.insert(normalized(v));
  // Level k holds combinations of exactly k distinct basis vectors with
  // coefficients +-1.
  std::vector<std::pair<Move, std::size_t>> frontier;  // (vector, last index used)
  for (std::size_t i = 0; i < basis.size(); ++i) frontier.emplace_back(basis[i], i);
  for (int level = 2; level <= depth; ++level) {
    std::vector<std::pair<Move, std::size_t>> next;
    for (const auto& [v, last] : frontier)
      for (std::size_t j = last + 1; j < basis.size(); ++j)
        for (int sign : {1, -1}) {
          Move w = v;
          for (std::size_t k = 0; k < w.size(); ++k) w[k] += sign * basis[j][k];
          if (std::all_of(w.begin(), w.end(), [](std::int64_t x) { return x == 0; })) continue;
          seen.insert(normalized(w));
          next.emplace_back(std::move(w), j);
        }
    frontier = std::move(next);
  }
  mb.moves.assign(seen.begin(), seen.end());
  return mb;
}

void write_basis(std::ostream& out, const MarkovBasis& basis) {
  out << "# exactdif-basis v" << kBasisFormatVersion << " fingerprint=" << basis.fingerprint
      << " kind=" << to_string(basis.kind) << " cells=" << basis.num_cells
      << " moves=" << basis.moves.size() << '\n';
  for (const auto& m : basis.moves) {
    for (std::size_t i = 0; i < m.size(); ++i) out << (i ? " " : "") << m[i];
    out << '\n';
  }
}

MarkovBasis read_basis(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# exactdif-basis v", 0) != 0)
    throw ParseError("basis file: missing header");
  MarkovBasis mb;
  std::size_t num_moves = 0;
  bool have_cells = false, have_moves = false;
  std::istringstream hs(header.substr(2));
  std::string tok;
  hs >> tok;  // exactdif-basis
  hs >> tok;  // vN
  if (tok != "v" + std::to_string(kBasisFormatVersion))
    throw ParseError("basis file: unsupported format " + tok);
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "fingerprint") mb.fingerprint = value;
    else if (key == "kind") mb.kind = value == "lattice" ? BasisKind::lattice : BasisKind::markov;
    else if (key == "cells") {
      mb.num_cells = std::stoul(value);
      have_cells = true;
    } else if (key == "moves") {
      num_moves = std::stoul(value);
      have_moves = true;
    }
  }
  if (!have_cells || !have_moves) throw ParseError("basis file: header lacks cells/moves");
  mb.moves.reserve(num_moves);
  for (std::size_t k = 0; k < num_moves; ++k) {
    Move m(mb.num_cells);
    for (auto& x : m)
      if (!(in >> x)) throw ParseError("basis file: truncated move list");
    mb.moves.push_back(std::move(m));
  }
  return mb;
}

}  // namespace exactdif
