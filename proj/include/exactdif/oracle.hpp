#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "exactdif/config.hpp"
#include "exactdif/intlinalg.hpp"

namespace exactdif {

inline constexpr std::uint64_t kDefaultFiberCap = 500'000;

struct FiberEnumeration {
  std::vector<std::vector<Count>> tables;  ///< canonical cell order, lexicographic
  BigInt count = 0;                        ///< not valid when truncated
  bool truncated = false;
};

/// Calls `visit` for every nonnegative integer vector v with config*v ==
/// stats, in lexicographic order of the canonical cell vector. Stops early
/// when `visit` returns false. Returns the number of vectors visited.
std::uint64_t for_each_in_fiber(const ConfigurationMatrix& config, std::span<const Count> stats,
                                const std::function<bool(std::span<const Count>)>& visit);

/// Depth-first enumeration. With a cap, stops after `cap` tables and sets
/// `truncated` if more exist. `keep_tables = false` only counts.
FiberEnumeration enumerate_fiber(const ConfigurationMatrix& config, std::span<const Count> stats,
                                 std::optional<std::uint64_t> cap = kDefaultFiberCap,
                                 bool keep_tables = true);

/// Counting-only variant; throws EnumerationTruncated past the cap.
BigInt fiber_count(const ConfigurationMatrix& config, std::span<const Count> stats,
                   std::optional<std::uint64_t> cap = kDefaultFiberCap);

/// Hypergeometric mass of {T : log_uprob(T) <= log_uprob(observed) + tie}
/// over the fiber of `observed` (canonical order). Throws
/// EnumerationTruncated when the fiber exceeds the cap.
double exhaustive_pvalue(const ConfigurationMatrix& config, std::span<const Count> observed,
                         std::optional<std::uint64_t> cap = kDefaultFiberCap);

}  // namespace exactdif
