#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "exactdif/error.hpp"
#include "exactdif/simulate.hpp"

using namespace exactdif;

namespace {

double norm2(const DifVector& d) {
  double s = 0;
  for (double x : d.u) s += x * x;
  for (double x : d.v) s += x * x;
  return std::sqrt(s);
}

double sum(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

}  // namespace

TEST_CASE("fixture seeds") {
  CHECK(is_fixture_seed(1930));
  CHECK(is_fixture_seed(1947));
  CHECK(is_fixture_seed(1948));
  CHECK_FALSE(is_fixture_seed(1));

  const auto m = make_model(1947);
  CHECK(m.from_fixture);
  CHECK(m.base.axes.num_abilities() == 2);
  CHECK(m.base.axes.num_responses() == 2);
  CHECK(m.base.u0[0] == doctest::Approx(-0.331).epsilon(1e-9));
  CHECK(m.base.v0[1] == doctest::Approx(0.625).epsilon(1e-9));
  CHECK(m.base.joint_ag[0] == doctest::Approx(0.429 * 0.368).epsilon(1e-3));
  CHECK(sum(m.base.joint_ag) == doctest::Approx(1.0));

  const auto m48 = make_model(1948);
  CHECK(m48.base.axes.num_abilities() == 4);
  CHECK(m48.base.axes.num_responses() == 3);
  CHECK(std::round(m48.nonuniform.v[0] * 1000) / 1000 == doctest::Approx(0.752).epsilon(2e-3));
}

TEST_CASE("DIF vectors live in C-perp with unit norm") {
  for (std::uint64_t seed : {1930ULL, 1947ULL, 1948ULL, 1ULL, 2ULL, 77ULL, 123456ULL}) {
    const auto m = make_model(seed);
    CAPTURE(seed);
    CHECK(norm2(m.uniform) == doctest::Approx(1.0));
    CHECK(norm2(m.nonuniform) == doctest::Approx(1.0));
    for (double x : m.uniform.u) CHECK(x == 0.0);
    CHECK(std::abs(sum(m.uniform.v)) < 1e-12);
    CHECK(std::abs(sum(m.nonuniform.u)) < 1e-12);
    CHECK(std::abs(sum(m.base.u0)) < 1e-12);
    CHECK(classify_true_dif(m.uniform.u, m.uniform.v) == DifConclusion::uniform);
    CHECK(classify_true_dif(m.nonuniform.u, m.nonuniform.v) == DifConclusion::nonuniform);
    CHECK_NOTHROW(m.base.validate());
    const auto twice = m.with(DifVectorKind::nonuniform_double);
    for (std::size_t r = 0; r < twice.u_delta.size(); ++r)
      CHECK(twice.u_delta[r] == doctest::Approx(2 * m.nonuniform.u[r]));
  }
  CHECK(make_model(99).base.u0 == make_model(99).base.u0);
}

TEST_CASE("true DIF classes") {
  CHECK(classify_true_dif({0, 0}, {0, 0}) == DifConclusion::no_dif);
  CHECK(classify_true_dif({0, 0}, {0.5, -0.5}) == DifConclusion::uniform);
  CHECK(classify_true_dif({0.1, -0.1}, {0, 0}) == DifConclusion::nonuniform);
  CHECK(project_cperp({1, 2, 3}) == std::vector<double>{-1, 0, 1});
}

TEST_CASE("tau mapping for seed 1947") {
  const auto m = make_model(1947).base;
  const auto tau = tau_mapping(m);
  CHECK(tau.tau[1] == doctest::Approx(0.662));
  CHECK(tau.tau[0] == doctest::Approx(1.250));
  CHECK(tau.tau[2] == 0.0);
  CHECK(tau.tau[3] == 0.0);
  const auto p = bock_conditional(m, 1, 0);
  CHECK(std::log(p[1] / p[0]) == doctest::Approx(1.912));
}

TEST_CASE("logit identity on random dichotomous models") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto sm = make_model(seed);
    if (!sm.base.axes.dichotomous()) continue;
    for (auto kind : kAllDifKinds) {
      const auto m = sm.with(kind);
      const auto tau = tau_mapping(m);
      for (std::size_t a = 0; a < m.axes.num_abilities(); ++a)
        for (int g = 0; g < 2; ++g) {
          const auto p = bock_conditional(m, a, g);
          const double x = static_cast<double>(m.axes.ability_levels[a]);
          const double eta = tau.tau[0] + tau.tau[1] * x + tau.tau[2] * g + tau.tau[3] * x * g;
          CHECK(std::abs(std::log(p[1] / p[0]) - eta) < 1e-12);
        }
    }
  }
}

TEST_CASE("constant shifts leave the conditional distribution unchanged") {
  const auto m = make_model(1948).with(DifVectorKind::nonuniform_unit);
  auto shifted = m;
  for (auto* vec : {&shifted.u0, &shifted.v0, &shifted.u_delta, &shifted.v_delta})
    for (auto& x : *vec) x += 0.37;
  for (std::size_t a = 0; a < m.axes.num_abilities(); ++a)
    for (int g = 0; g < 2; ++g) {
      const auto p = bock_conditional(m, a, g);
      const auto q = bock_conditional(shifted, a, g);
      CHECK(std::abs(sum(p) - 1.0) < 1e-14);
      for (std::size_t r = 0; r < p.size(); ++r) CHECK(std::abs(p[r] - q[r]) < 1e-14);
    }
}

TEST_CASE("multinomial sampling") {
  const auto m = make_model(1948).base;
  Rng a(5), b(5);
  const auto t1 = sample_table(m, 300, a);
  const auto t2 = sample_table(m, 300, b);
  CHECK(to_canonical(t1) == to_canonical(t2));
  CHECK(t1.total() == 300);
  Rng c(6);
  CHECK(sample_table(m, 1, c).total() == 1);
  CHECK_THROWS_AS(sample_table(m, 0, c), InvalidArgument);

  // Law of large numbers on the cell probabilities.
  Rng d(7);
  const std::int64_t n = 400000;
  const auto big = sample_table(m, n, d);
  for (std::size_t ai = 0; ai < m.axes.num_abilities(); ++ai)
    for (int g = 0; g < 2; ++g) {
      const auto p = bock_conditional(m, ai, g);
      for (std::size_t r = 0; r < p.size(); ++r) {
        const double pi = m.joint_ag[2 * ai + g] * p[r];
        const double se = std::sqrt(pi * (1 - pi) / n);
        CHECK(std::abs(static_cast<double>(big.at(ai, g, r)) / n - pi) <= 5 * se + 1e-12);
      }
    }
}

TEST_CASE("simulation study") {
  SimulationPlan plan;
  plan.seeds = {1947, 5};
  plan.sample_sizes = {40, 160};
  plan.replicates = 12;
  plan.kinds = {DifVectorKind::zero, DifVectorKind::nonuniform_double};
  AnalysisSpec asym;
  asym.family = FamilyKind::logistic;
  asym.strategy = Strategy::asymptotic;
  asym.test_full = false;
  AnalysisSpec ex = asym;
  ex.strategy = Strategy::exact;
  ex.walk = {600, 100, 2, 1};
  AnalysisSpec ll;
  ll.walk = ex.walk;
  plan.analyses = {asym, ex, ll};

  const auto r1 = run_study(plan, 1);
  const auto r3 = run_study(plan, 3);
  REQUIRE(r1.cells.size() == r3.cells.size());
  for (std::size_t i = 0; i < r1.cells.size(); ++i) {
    const auto& c = r1.cells[i];
    CHECK(c.conclusions == r3.cells[i].conclusions);
    double total = c.error_rate();
    for (int k = 0; k < 5; ++k) total += c.rate(static_cast<DifConclusion>(k));
    if (c.replicates > 0) CHECK(total == doctest::Approx(1.0));
    CHECK(c.mle_exist_no3w <= c.replicates);
    if (c.analysis == "logistic/exact") {
      CHECK(c.conclusions[static_cast<int>(DifConclusion::failure)] == 0);
      CHECK(c.conclusions[static_cast<int>(DifConclusion::unclassifiable)] == 0);
    }
  }
  std::ostringstream a, b;
  write_study_csv(a, r1);
  write_study_csv(b, r3);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("seed,dif_kind,n,analysis,conclusion,rate", 0) == 0);
}

TEST_CASE("plan parsing") {
  std::istringstream in(R"({"seeds": [1947], "sample_sizes": [50, 100], "replicates": 3,
    "kinds": ["zero", "uniform1"],
    "analyses": [{"family": "logistic", "strategy": "exact", "iterations": 2000}]})");
  const auto plan = read_plan(in);
  CHECK(plan.seeds == std::vector<std::uint64_t>{1947});
  CHECK(plan.replicates == 3);
  REQUIRE(plan.kinds.size() == 2);
  CHECK(plan.kinds[1] == DifVectorKind::uniform_unit);
  REQUIRE(plan.analyses.size() == 1);
  CHECK(plan.analyses[0].walk.iterations == 2000);
  CHECK(SimulationPlan::default_sizes().front() == 25);
  CHECK(SimulationPlan::default_sizes().back() == 12800);

  std::istringstream bad(R"({"seeds": [1], "replicates": 0})");
  CHECK_THROWS(read_plan(bad).validate());
  std::istringstream junk("{");
  CHECK_THROWS_AS(read_plan(junk), ParseError);
}
