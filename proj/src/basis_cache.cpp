#include "exactdif/basis_cache.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "exactdif/error.hpp"

namespace exactdif {
namespace {

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

struct Slot {
  std::mutex m;
  std::optional<MarkovBasis> basis;
};

// One slot per fingerprint: different configurations compute in parallel,
// callers asking for the same one wait for the first.
std::shared_ptr<Slot> slot_for(const std::string& key) {
  static std::map<std::string, std::shared_ptr<Slot>> slots;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto& s = slots[key];
  if (!s) s = std::make_shared<Slot>();
  return s;
}

}  // namespace

BasisCache BasisCache::from_environment() {
  const char* dir = std::getenv("EXACTDIF_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return BasisCache{};
  return BasisCache{dir};
}

std::filesystem::path BasisCache::file_for(const std::string& fingerprint, BasisKind kind) const {
  return dir_ / ("basis-" + fingerprint + "-" + to_string(kind) + ".txt");
}

std::optional<MarkovBasis> BasisCache::load(const std::string& fingerprint, BasisKind kind) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(file_for(fingerprint, kind));
  if (!in) return std::nullopt;
  try {
    MarkovBasis mb = read_basis(in);
    if (mb.fingerprint != fingerprint || mb.kind != kind) return std::nullopt;
    return mb;
  } catch (const ParseError&) {
    return std::nullopt;  // stale or foreign file: recompute
  }
}

void BasisCache::store(const MarkovBasis& basis) const {
  if (!enabled()) return;
  std::filesystem::create_directories(dir_);
  const auto target = file_for(basis.fingerprint, basis.kind);
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write basis cache file " + tmp);
    write_basis(out, basis);
  }
  std::filesystem::rename(tmp, target);
}

MarkovBasis cached_markov_basis(const ConfigurationMatrix& config, const BasisCache& cache,
                                bool allow_lattice, const GroebnerLimits& limits) {
  const std::string fp = config.fingerprint();
  {
    auto slot = slot_for(fp + ":markov");
    std::lock_guard<std::mutex> lock(slot->m);
    if (slot->basis) return *slot->basis;
    std::optional<MarkovBasis> hit;
    {
      std::lock_guard<std::mutex> io(cache_mutex());
      hit = cache.load(fp, BasisKind::markov);
    }
    if (hit) {
      slot->basis = std::move(hit);
      return *slot->basis;
    }
    try {
      MarkovBasis mb = markov_basis(config, limits);
      {
        std::lock_guard<std::mutex> io(cache_mutex());
        cache.store(mb);
      }
      slot->basis = mb;
      return mb;
    } catch (const BasisTooLarge&) {
      if (!allow_lattice) throw;
    }
  }
  auto slot = slot_for(fp + ":lattice");
  std::lock_guard<std::mutex> lock(slot->m);
  if (!slot->basis) slot->basis = lattice_fallback(config);
  return *slot->basis;
}

}  // namespace exactdif
