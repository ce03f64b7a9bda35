#pragma once

#include <filesystem>
#include <optional>

#include "exactdif/markov.hpp"

namespace exactdif {

/// On-disk store of Markov bases keyed by configuration fingerprint.
/// Directory resolution: explicit path, else $EXACTDIF_CACHE_DIR, else
/// caching is disabled. All access goes through one process-wide mutex.
class BasisCache {
 public:
  BasisCache() = default;
  explicit BasisCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  /// Cache rooted at $EXACTDIF_CACHE_DIR, or a disabled cache.
  static BasisCache from_environment();

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& directory() const { return dir_; }

  std::optional<MarkovBasis> load(const std::string& fingerprint, BasisKind kind) const;
  void store(const MarkovBasis& basis) const;

 private:
  std::filesystem::path file_for(const std::string& fingerprint, BasisKind kind) const;
  std::filesystem::path dir_;
};

/// Markov basis for `config`, memoized in-process and, when `cache` is
/// enabled, on disk. With `allow_lattice`, a BasisTooLarge failure falls
/// back to `lattice_fallback`.
MarkovBasis cached_markov_basis(const ConfigurationMatrix& config, const BasisCache& cache,
                                bool allow_lattice = false, const GroebnerLimits& limits = {});

}  // namespace exactdif
