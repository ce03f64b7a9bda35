#include "exactdif/dif.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "exactdif/error.hpp"
#include "exactdif/rng.hpp"

namespace exactdif {

std::string to_string(DifConclusion c) {
  switch (c) {
    case DifConclusion::no_dif: return "none";
    case DifConclusion::uniform: return "uniform";
    case DifConclusion::nonuniform: return "nonuniform";
    case DifConclusion::failure: return "failure";
    case DifConclusion::unclassifiable: return "unclassifiable";
  }
  return "unknown";
}

std::string to_string(Strategy s) { return s == Strategy::asymptotic ? "asymptotic" : "exact"; }

std::string to_string(Variant v) {
  switch (v) {
    case Variant::standard: return "standard";
    case Variant::swapped: return "swapped";
    case Variant::nested_augmented: return "nested";
  }
  return "unknown";
}

DifConclusion parse_conclusion(std::string_view t) {
  if (t == "none" || t == "no_dif") return DifConclusion::no_dif;
  if (t == "uniform") return DifConclusion::uniform;
  if (t == "nonuniform") return DifConclusion::nonuniform;
  if (t == "failure") return DifConclusion::failure;
  if (t == "unclassifiable") return DifConclusion::unclassifiable;
  throw InvalidArgument("unknown conclusion '" + std::string(t) + "'");
}

Strategy parse_strategy(std::string_view t) {
  if (t == "asymptotic" || t == "asym") return Strategy::asymptotic;
  if (t == "exact") return Strategy::exact;
  throw InvalidArgument("unknown strategy '" + std::string(t) + "' (asymptotic, exact)");
}

Variant parse_variant(std::string_view t) {
  if (t == "standard") return Variant::standard;
  if (t == "swapped") return Variant::swapped;
  if (t == "nested" || t == "nested_augmented" || t == "nested-augmented")
    return Variant::nested_augmented;
  throw InvalidArgument("unknown variant '" + std::string(t) + "' (standard, swapped, nested)");
}

void AnalysisSpec::validate(const AxisSpec& axes) const {
  axes.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (family == FamilyKind::cmh)
    throw InvalidArgument("the CMH family supports detection only; use loglinear or logistic");
  if (family == FamilyKind::logistic && !axes.dichotomous())
    throw InvalidArgument("logistic DIF analysis needs a dichotomous item");
  if (variant == Variant::nested_augmented && strategy != Strategy::asymptotic)
    throw InvalidArgument("the nested-augmented variant is only available with the asymptotic strategy");
  if (strategy == Strategy::exact) walk.validate();
}

std::string AnalysisSpec::name() const {
  std::string s = to_string(family) + "/" + to_string(strategy);
  if (variant != Variant::standard) s += "/" + to_string(variant);
  return s;
}

std::uint64_t item_seed(std::uint64_t seed, std::size_t index) {
  return Rng::stream(seed, index).next();
}

namespace {

ModelFamily family_at(FamilyKind kind, Level level) {
  return kind == FamilyKind::logistic ? ModelFamily::logistic(level) : ModelFamily::loglinear(level);
}

// Runs one test. For the asymptotic strategy an absent p-value means the MLE
// does not exist (or the heuristic gate failed).
ModelTest run_test(const ContingencyTable& table, const AnalysisSpec& spec, Level level,
                   std::uint64_t stream) {
  ModelTest t;
  t.level = level;
  const ModelFamily fam = family_at(spec.family, level);
  if (spec.strategy == Strategy::asymptotic) {
    AsymptoticResult r = asymptotic_test(table, fam);
    t.existence = r.existence;
    t.gof = r.gof;
    if (r.gof && (!spec.heuristic_gated || r.gof->heuristic_met)) t.p_value = r.gof->p_value;
  } else {
    WalkConfig w = spec.walk;
    w.seed = stream == 0 ? spec.walk.seed : Rng::stream(spec.walk.seed, stream).next();
    t.exact = exact_test(table, fam, w, spec.exact);
    t.p_value = t.exact->p_value;
  }
  return t;
}

}  // namespace

ItemReport analyze(const ContingencyTable& table, const AnalysisSpec& spec, const std::string& item) {
  spec.validate(table.axes());
  ItemReport rep;
  rep.item = item;
  const double alpha = spec.alpha;
  auto record = [&](ModelTest t) -> const ModelTest& {
    if (t.level == Level::cond_indep) rep.p_c = t.p_value;
    if (t.level == Level::no3way) rep.p_no3w = t.p_value;
    if (t.level == Level::full) rep.p_full = t.p_value;
    rep.tests.push_back(std::move(t));
    return rep.tests.back();
  };
  // Stream 0 is the 𝒫_c walk; the other models get fresh streams.
  auto test = [&](Level level) -> const ModelTest& {
    const std::uint64_t stream = level == Level::cond_indep ? 0 : level == Level::no3way ? 1 : 2;
    return record(run_test(table, spec, level, stream));
  };

  if (spec.variant == Variant::swapped) {
    if (spec.strategy == Strategy::asymptotic) {
      // 𝒫_c existence is still required for any conclusion.
      const ExistenceReport ex_c = mle_exists(table, family_at(spec.family, Level::cond_indep));
      if (!ex_c.exists) {
        ModelTest t;
        t.level = Level::cond_indep;
        t.existence = ex_c;
        record(std::move(t));
        rep.conclusion = DifConclusion::failure;
      }
    }
    if (rep.tests.empty()) {
      const ModelTest& n3 = test(Level::no3way);
      if (!n3.p_value) {
        rep.conclusion = DifConclusion::unclassifiable;
      } else if (*n3.p_value <= alpha) {
        rep.conclusion = DifConclusion::nonuniform;
      } else {
        const ModelTest& c = test(Level::cond_indep);
        if (!c.p_value)
          rep.conclusion = DifConclusion::failure;
        else
          rep.conclusion = *c.p_value <= alpha ? DifConclusion::uniform : DifConclusion::no_dif;
      }
    }
  } else {
    const ModelTest& c = test(Level::cond_indep);
    if (!c.p_value) {
      rep.conclusion = DifConclusion::failure;
    } else if (*c.p_value > alpha) {
      rep.conclusion = DifConclusion::no_dif;
    } else {
      const ModelTest& n3 = test(Level::no3way);
      if (!n3.p_value) {
        rep.conclusion = DifConclusion::unclassifiable;
      } else if (*n3.p_value <= alpha) {
        rep.conclusion = DifConclusion::nonuniform;
      } else {
        rep.conclusion = DifConclusion::uniform;
        if (spec.variant == Variant::nested_augmented) {
          const GofResult& gc = *rep.tests.front().gof;
          const GofResult& gn = *rep.tests.back().gof;
          const double diff = std::max(0.0, gc.g_stat - gn.g_stat);
          rep.p_nested = chisq_tail(diff, gc.df - gn.df);
          if (*rep.p_nested > alpha) rep.conclusion = DifConclusion::unclassifiable;
        }
      }
    }
  }

  if (spec.test_full && spec.family == FamilyKind::logistic) test(Level::full);
  return rep;
}

std::vector<double> bh_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("p-values must lie in [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double v = p[order[k]] * static_cast<double>(m) / static_cast<double>(k + 1);
    running = std::min(running, v);
    // max() guards against rounding below the raw p-value.
    adj[order[k]] = std::max(p[order[k]], std::min(1.0, running));
  }
  return adj;
}

BatchResult batch_analyze(const std::vector<ItemTable>& tables, const AnalysisSpec& spec, int jobs) {
  BatchResult out;
  out.spec = spec;
  out.items.resize(tables.size());
  if (tables.empty()) return out;
  for (const auto& t : tables)
    if (!(t.table.axes() == tables.front().table.axes()))
      throw InvalidArgument("batch items must share the same axes");
  spec.validate(tables.front().table.axes());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tables.size(); k = next++) {
      AnalysisSpec s = spec;
      s.walk.seed = item_seed(spec.walk.seed, k);
      try {
        out.items[k] = analyze(tables[k].table, s, tables[k].name);
      } catch (const std::exception& e) {
        out.items[k] = ItemReport{};
        out.items[k].item = tables[k].name;
        out.items[k].conclusion = DifConclusion::failure;
        out.items[k].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tables.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // BH within this block, over the items that produced each p-value.
  auto annotate = [&](auto get, auto set) {
    std::vector<double> ps;
    std::vector<std::size_t> who;
    for (std::size_t k = 0; k < out.items.size(); ++k)
      if (auto p = get(out.items[k])) {
        ps.push_back(*p);
        who.push_back(k);
      }
    const auto adj = bh_adjust(ps);
    for (std::size_t i = 0; i < who.size(); ++i) set(out.items[who[i]], adj[i]);
  };
  annotate([](const ItemReport& r) { return r.p_c; },
           [](ItemReport& r, double a) { r.p_c_adjusted = a; });
  annotate([](const ItemReport& r) { return r.p_full; },
           [](ItemReport& r, double a) { r.p_full_adjusted = a; });
  for (auto& r : out.items) {
    const bool dif = r.conclusion == DifConclusion::uniform ||
                     r.conclusion == DifConclusion::nonuniform ||
                     r.conclusion == DifConclusion::unclassifiable;
    r.dagger = dif && r.p_c_adjusted && *r.p_c_adjusted > spec.alpha;
    r.star = spec.family == FamilyKind::logistic && r.p_full_adjusted &&
             *r.p_full_adjusted <= spec.alpha;
  }
  return out;
}

std::string table_cell(const ItemReport& report) {
  std::string s = to_string(report.conclusion);
  if (report.dagger) s += "†";
  if (report.star) s += "*";
  return s;
}

}  // namespace exactdif
