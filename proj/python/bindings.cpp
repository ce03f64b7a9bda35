#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "exactdif/basis_cache.hpp"
#include "exactdif/error.hpp"
#include "exactdif/examples.hpp"
#include "exactdif/report.hpp"
#include "exactdif/simulate.hpp"

namespace py = pybind11;
using namespace exactdif;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ContingencyTable make_table(const std::vector<Count>& counts, std::size_t abilities,
                            std::size_t responses) {
  return ContingencyTable(AxisSpec::uniform(abilities, responses), counts);
}

ModelFamily family_of(const std::string& family, const std::string& level) {
  const Level lv = parse_level(level);
  switch (parse_family(family)) {
    case FamilyKind::loglinear: return ModelFamily::loglinear(lv);
    case FamilyKind::logistic: return ModelFamily::logistic(lv);
    case FamilyKind::cmh: return ModelFamily::cmh(lv);
  }
  throw InvalidArgument("unknown family");
}

WalkConfig walk_of(int iterations, int burn_in, int thinning, std::uint64_t seed) {
  WalkConfig w;
  w.iterations = iterations;
  w.burn_in = burn_in;
  w.thinning = thinning;
  w.seed = seed;
  return w;
}

}  // namespace

PYBIND11_MODULE(_exactdif, m) {
  m.doc() = "Exact and asymptotic DIF analysis of A x G x R contingency tables";
  m.attr("__version__") = EXACTDIF_VERSION;
  m.attr("BASIS_FORMAT_VERSION") = kBasisFormatVersion;

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<exactdif::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<BasisTooLarge>(m, "BasisTooLarge", PyExc_RuntimeError);
  py::register_exception<MleNonexistent>(m, "MleNonexistent", PyExc_RuntimeError);
  py::register_exception<EnumerationTruncated>(m, "EnumerationTruncated", PyExc_RuntimeError);

  m.def("hci_item17", [] {
    const ItemTable t = hci_item17();
    const auto c = t.table.natural_counts();
    return std::vector<Count>(c.begin(), c.end());
  }, "Natural-order counts (a, g, r) of the bundled 6x2x2 example table.");

  m.def("analyze",
        [](const std::vector<Count>& counts, std::size_t abilities, std::size_t responses,
           const std::string& family, const std::string& strategy, const std::string& variant,
           double alpha, int iterations, int burn_in, int thinning, std::uint64_t seed,
           bool allow_lattice) {
          AnalysisSpec spec;
          spec.family = parse_family(family);
          spec.strategy = parse_strategy(strategy);
          spec.variant = parse_variant(variant);
          spec.alpha = alpha;
          spec.walk = walk_of(iterations, burn_in, thinning, seed);
          spec.exact.allow_lattice = allow_lattice;
          const ContingencyTable t = make_table(counts, abilities, responses);
          ItemReport rep;
          {
            py::gil_scoped_release nogil;
            rep = analyze(t, spec);
          }
          return to_python(to_json(rep));
        },
        py::arg("counts"), py::arg("abilities"), py::arg("responses") = 2,
        py::arg("family") = "loglinear", py::arg("strategy") = "asymptotic",
        py::arg("variant") = "standard", py::arg("alpha") = 0.05, py::arg("iterations") = 10000,
        py::arg("burn_in") = 1000, py::arg("thinning") = 10, py::arg("seed") = 1,
        py::arg("allow_lattice") = false,
        "Two-step DIF analysis; counts are in natural (a, g, r) order.");

  m.def("fit",
        [](const std::vector<Count>& counts, std::size_t abilities, std::size_t responses,
           const std::string& family, const std::string& level) {
          const ModelFamily fam = family_of(family, level);
          return to_python(to_json(asymptotic_test(make_table(counts, abilities, responses), fam), fam));
        },
        py::arg("counts"), py::arg("abilities"), py::arg("responses") = 2,
        py::arg("family") = "loglinear", py::arg("level") = "c");

  m.def("exact_test",
        [](const std::vector<Count>& counts, std::size_t abilities, std::size_t responses,
           const std::string& family, const std::string& level, int iterations, int burn_in,
           int thinning, std::uint64_t seed) {
          const ContingencyTable t = make_table(counts, abilities, responses);
          ExactTestResult r;
          {
            py::gil_scoped_release nogil;
            r = exact_test(t, family_of(family, level), walk_of(iterations, burn_in, thinning, seed));
          }
          return to_python(to_json(r));
        },
        py::arg("counts"), py::arg("abilities"), py::arg("responses") = 2,
        py::arg("family") = "loglinear", py::arg("level") = "c", py::arg("iterations") = 10000,
        py::arg("burn_in") = 1000, py::arg("thinning") = 10, py::arg("seed") = 1);

  m.def("markov_basis",
        [](std::size_t abilities, std::size_t responses, const std::string& family,
           const std::string& level) {
          const auto config =
              configuration(family_of(family, level), AxisSpec::uniform(abilities, responses));
          py::gil_scoped_release nogil;
          return cached_markov_basis(config, BasisCache::from_environment()).moves;
        },
        py::arg("abilities"), py::arg("responses") = 2, py::arg("family") = "loglinear",
        py::arg("level") = "c", "Moves in canonical cell order.");

  m.def("fiber_count",
        [](const std::vector<Count>& counts, std::size_t abilities, std::size_t responses,
           const std::string& family, const std::string& level, std::optional<std::uint64_t> cap) {
          const ContingencyTable t = make_table(counts, abilities, responses);
          const auto config = configuration(family_of(family, level), t.axes());
          const auto stats = sufficient_statistics(config, t);
          std::string s;
          {
            py::gil_scoped_release nogil;
            s = fiber_count(config, stats, cap).str();
          }
          return py::int_(py::module_::import("builtins").attr("int")(s));
        },
        py::arg("counts"), py::arg("abilities"), py::arg("responses") = 2,
        py::arg("family") = "loglinear", py::arg("level") = "c", py::arg("cap") = py::none());

  m.def("mle_exists",
        [](const std::vector<Count>& counts, std::size_t abilities, std::size_t responses,
           const std::string& family, const std::string& level) {
          return to_python(
              to_json(mle_exists(make_table(counts, abilities, responses), family_of(family, level))));
        },
        py::arg("counts"), py::arg("abilities"), py::arg("responses") = 2,
        py::arg("family") = "loglinear", py::arg("level") = "c");

  m.def("bh_adjust", [](const std::vector<double>& p) { return bh_adjust(p); }, py::arg("pvalues"));

  m.def("chisq_tail", &chisq_tail, py::arg("x"), py::arg("df"));

  m.def("sample_table",
        [](std::uint64_t model_seed, const std::string& kind, std::int64_t n, std::uint64_t rng_seed) {
          const SeedModel sm = make_model(model_seed);
          Rng rng(rng_seed);
          const ContingencyTable t = sample_table(sm.with(parse_dif_kind(kind)), n, rng);
          const auto nc = t.natural_counts();
          const std::vector<Count> c(nc.begin(), nc.end());
          return py::make_tuple(c, sm.base.axes.num_abilities(), sm.base.axes.num_responses());
        },
        py::arg("model_seed"), py::arg("kind"), py::arg("n"), py::arg("rng_seed") = 1,
        "Draws one table from a seed's Bock model; returns (counts, abilities, responses).");
}
