#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "exactdif/config.hpp"

namespace exactdif {

using Move = std::vector<std::int64_t>;

/// x^lead - x^trail with lead the larger term in the order used.
struct Binomial {
  std::vector<std::int64_t> lead;
  std::vector<std::int64_t> trail;
  Move exponent_difference() const;
};

/// Graded reverse lexicographic order. `priority[0]` is the most significant
/// variable and `priority.back()` the cheapest one.
struct MonomialOrder {
  std::vector<std::size_t> priority;

  /// Canonical cell order: variable 0 largest, the last cell smallest.
  static MonomialOrder grevlex(std::size_t num_vars);
  /// Same as `*this` but with `var` moved to the cheapest position.
  MonomialOrder with_lowest(std::size_t var) const;
  /// <0, 0, >0 as x^a is smaller than, equal to, or larger than x^b.
  int compare(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) const;
};

struct GroebnerLimits {
  std::uint64_t max_reductions = 1'000'000;  ///< S-pair reductions over all stages
  double max_seconds_per_stage = 60.0;
};

/// Reduced Groebner basis of the toric ideal of `config` under `order`.
/// Starts from an integer kernel basis and saturates one variable at a time.
/// Throws BasisTooLarge when a limit is exceeded.
std::vector<Binomial> toric_groebner(const ConfigurationMatrix& config, const MonomialOrder& order,
                                     const GroebnerLimits& limits = {});

enum class BasisKind { markov, lattice };
std::string to_string(BasisKind kind);

struct MarkovBasis {
  std::vector<Move> moves;
  std::string fingerprint;  ///< ConfigurationMatrix::fingerprint() of the source
  BasisKind kind = BasisKind::markov;
  std::size_t num_cells = 0;
};

/// Moves read off the reduced Groebner basis (grevlex, canonical priority),
/// each normalized so its first nonzero entry is positive, sorted.
MarkovBasis markov_basis(const ConfigurationMatrix& config, const GroebnerLimits& limits = {});

/// Kernel lattice basis plus sums/differences of up to `depth` basis vectors.
/// Connectivity of fibers is not guaranteed.
MarkovBasis lattice_fallback(const ConfigurationMatrix& config, int depth = 2);

/// Format version of the basis text file / cache.
inline constexpr int kBasisFormatVersion = 1;

/// Header "# exactdif-basis v1 fingerprint=... kind=... cells=... moves=...",
/// then one move per line as space-separated integers in canonical cell order.
void write_basis(std::ostream& out, const MarkovBasis& basis);
MarkovBasis read_basis(std::istream& in);

}  // namespace exactdif
