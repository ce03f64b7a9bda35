#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "exactdif/basis_cache.hpp"
#include "exactdif/error.hpp"
#include "exactdif/examples.hpp"
#include "oracles.hpp"

using namespace exactdif;

namespace {

ModelFamily make_family(FamilyKind k, Level lv) {
  return k == FamilyKind::loglinear ? ModelFamily::loglinear(lv)
         : k == FamilyKind::logistic ? ModelFamily::logistic(lv)
                                     : ModelFamily::cmh(lv);
}

void check_moves_in_kernel(const ConfigurationMatrix& c, const MarkovBasis& b) {
  for (const auto& m : b.moves) {
    REQUIRE(m.size() == c.cols());
    const auto image = c.apply(m);
    CHECK(std::all_of(image.begin(), image.end(), [](Count x) { return x == 0; }));
    const auto first = std::find_if(m.begin(), m.end(), [](auto x) { return x != 0; });
    REQUIRE(first != m.end());
    CHECK(*first > 0);
  }
}

// Random table with the given shape and total, canonical order.
std::vector<Count> random_cells(std::mt19937_64& gen, std::size_t cells, int n) {
  std::vector<Count> v(cells, 0);
  std::uniform_int_distribution<std::size_t> d(0, cells - 1);
  for (int i = 0; i < n; ++i) ++v[d(gen)];
  return v;
}

}  // namespace

TEST_CASE("small log-linear bases") {
  const auto c2 = configuration(ModelFamily::loglinear(Level::cond_indep), AxisSpec::uniform(2, 2));
  const auto b2 = markov_basis(c2);
  CHECK(b2.moves.size() == 2);
  check_moves_in_kernel(c2, b2);

  // One basic 2x2 move per ability slice.
  const auto c6 = configuration(ModelFamily::loglinear(Level::cond_indep), AxisSpec::uniform(6, 2));
  const auto b6 = markov_basis(c6);
  CHECK(b6.moves.size() == 6);
  check_moves_in_kernel(c6, b6);
  for (const auto& m : b6.moves) {
    int nz = 0;
    for (auto x : m) nz += x != 0;
    CHECK(nz == 4);
  }

  const auto n6 = configuration(ModelFamily::loglinear(Level::no3way), AxisSpec::uniform(6, 2));
  const auto bn = markov_basis(n6);
  CHECK(bn.moves.size() == 15);  // one degree-4 move per pair of slices
  check_moves_in_kernel(n6, bn);
  CHECK(bn.fingerprint == n6.fingerprint());
  CHECK(bn.num_cells == 24);
}

TEST_CASE("reduced Groebner basis is reduced") {
  const auto c = configuration(ModelFamily::loglinear(Level::no3way), AxisSpec::uniform(3, 3));
  const MonomialOrder order = MonomialOrder::grevlex(c.cols());
  const auto gb = toric_groebner(c, order);
  REQUIRE(!gb.empty());
  auto divides = [](const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > y[i]) return false;
    return true;
  };
  for (std::size_t i = 0; i < gb.size(); ++i) {
    CHECK(order.compare(gb[i].lead, gb[i].trail) > 0);
    for (std::size_t j = 0; j < gb.size(); ++j) {
      if (i == j) continue;
      CHECK_FALSE(divides(gb[j].lead, gb[i].lead));
      CHECK_FALSE(divides(gb[j].lead, gb[i].trail));
    }
  }
}

TEST_CASE("basis connectivity on enumerable fibers") {
  std::mt19937_64 gen(2024);
  struct Case {
    FamilyKind kind;
    Level level;
    std::size_t na, nr;
  };
  const std::vector<Case> cases{
      {FamilyKind::loglinear, Level::cond_indep, 3, 3}, {FamilyKind::loglinear, Level::no3way, 3, 3},
      {FamilyKind::loglinear, Level::no3way, 2, 4},     {FamilyKind::logistic, Level::cond_indep, 4, 2},
      {FamilyKind::logistic, Level::no3way, 4, 2},      {FamilyKind::logistic, Level::full, 4, 2},
      {FamilyKind::cmh, Level::cond_indep, 3, 2},       {FamilyKind::cmh, Level::no3way, 3, 2}};
  for (const auto& cs : cases) {
    const auto axes = AxisSpec::uniform(cs.na, cs.nr);
    const auto fam = make_family(cs.kind, cs.level);
    const auto c = configuration(fam, axes);
    const auto b = markov_basis(c);
    check_moves_in_kernel(c, b);
    for (int trial = 0; trial < 5; ++trial) {
      const auto cells = random_cells(gen, axes.num_cells(), 12);
      const auto fiber = enumerate_fiber(c, c.apply(cells), 50000);
      REQUIRE_FALSE(fiber.truncated);
      CAPTURE(fam.name());
      CHECK(oracle::fiber_connected(fiber.tables, b.moves));
    }
  }
}

TEST_CASE("lattice fallback stays in the kernel") {
  const auto c = configuration(ModelFamily::logistic(Level::no3way), AxisSpec::uniform(4, 2));
  const auto lb = lattice_fallback(c);
  CHECK(lb.kind == BasisKind::lattice);
  check_moves_in_kernel(c, lb);
}

TEST_CASE("limits throw BasisTooLarge") {
  const auto c = configuration(ModelFamily::logistic(Level::cond_indep), AxisSpec::uniform(5, 2));
  GroebnerLimits tiny;
  tiny.max_reductions = 5;
  CHECK_THROWS_AS(markov_basis(c, tiny), BasisTooLarge);
  // With the lattice fallback allowed, the cache hands back a lattice basis.
  const auto lb = cached_markov_basis(c, BasisCache{}, true, tiny);
  CHECK(lb.kind == BasisKind::lattice);
}

TEST_CASE("basis text round trip and disk cache") {
  const auto c = configuration(ModelFamily::loglinear(Level::no3way), AxisSpec::uniform(3, 2));
  const auto b = markov_basis(c);
  std::stringstream ss;
  write_basis(ss, b);
  CHECK(ss.str().rfind("# exactdif-basis v1 ", 0) == 0);
  const auto back = read_basis(ss);
  CHECK(back.moves == b.moves);
  CHECK(back.fingerprint == b.fingerprint);
  CHECK(back.kind == b.kind);

  const auto dir = std::filesystem::temp_directory_path() / "exactdif-test-cache";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const BasisCache cache(dir);
  CHECK_FALSE(cache.load(b.fingerprint, BasisKind::markov).has_value());
  cache.store(b);
  const auto loaded = cache.load(b.fingerprint, BasisKind::markov);
  REQUIRE(loaded.has_value());
  CHECK(loaded->moves == b.moves);
  std::filesystem::remove_all(dir);

  std::istringstream garbage("not a basis\n1 2 3\n");
  CHECK_THROWS_AS(read_basis(garbage), ParseError);
}
