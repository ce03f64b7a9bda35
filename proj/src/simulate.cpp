#include "exactdif/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "exactdif/error.hpp"

namespace exactdif {
namespace detail {
extern const char* const kBockSeedsJson;
}

namespace {

using nlohmann::json;

const json& fixture() {
  static const json data = json::parse(detail::kBockSeedsJson);
  return data;
}

double norm2(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (double x : u) s += x * x;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

DifVector unit(std::vector<double> u, std::vector<double> v) {
  u = project_cperp(u);
  v = project_cperp(v);
  const double nrm = norm2(u, v);
  if (nrm == 0.0) throw InvalidArgument("DIF direction must be nonzero");
  for (double& x : u) x /= nrm;
  for (double& x : v) x /= nrm;
  return {std::move(u), std::move(v)};
}

std::vector<double> normalized(std::vector<double> p) {
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return p;
}

// Pr[A, G] from Pr[G = 0] and the two conditionals.
std::vector<double> joint_from(double p0, const std::vector<double>& given0,
                               const std::vector<double>& given1) {
  const auto c0 = normalized(given0), c1 = normalized(given1);
  std::vector<double> joint(2 * c0.size());
  for (std::size_t a = 0; a < c0.size(); ++a) {
    joint[2 * a] = p0 * c0[a];
    joint[2 * a + 1] = (1.0 - p0) * c1[a];
  }
  return joint;
}

SeedModel from_fixture(std::uint64_t seed, const json& j) {
  SeedModel m;
  m.seed = seed;
  m.from_fixture = true;
  const auto g0 = j.at("p_ability_given_group").at(0).get<std::vector<double>>();
  const auto g1 = j.at("p_ability_given_group").at(1).get<std::vector<double>>();
  if (g0.size() != g1.size()) throw InvalidArgument("fixture ability distributions differ in size");
  const auto nr = j.at("responses").get<std::size_t>();
  m.base.axes = AxisSpec::uniform(g0.size(), nr);
  m.base.joint_ag = joint_from(j.at("p_group0").get<double>(), g0, g1);
  m.base.u0 = project_cperp(j.at("u0").get<std::vector<double>>());
  m.base.v0 = project_cperp(j.at("v0").get<std::vector<double>>());
  m.base.u_delta.assign(nr, 0.0);
  m.base.v_delta.assign(nr, 0.0);
  auto dv = [&](const char* key) {
    const json& d = j.at(key);
    return unit(d.at("u").get<std::vector<double>>(), d.at("v").get<std::vector<double>>());
  };
  m.uniform = dv("uniform");
  std::fill(m.uniform.u.begin(), m.uniform.u.end(), 0.0);
  m.nonuniform = dv("nonuniform");
  return m;
}

std::vector<double> normals(Rng& rng, std::size_t k, double sd) {
  std::vector<double> x(k);
  for (double& v : x) v = sd * rng.normal();
  return x;
}

// Dirichlet(2, ..., 2) with a small floor so every level has positive mass.
std::vector<double> dirichlet2(Rng& rng, std::size_t k) {
  std::vector<double> p(k);
  for (double& x : p) {
    double u1 = 0.0, u2 = 0.0;
    while (u1 <= 0.0) u1 = rng.uniform();
    while (u2 <= 0.0) u2 = rng.uniform();
    x = -std::log(u1 * u2);
  }
  p = normalized(p);
  for (double& x : p) x = std::max(x, 0.01);
  return normalized(p);
}

SeedModel generated(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x424f434bull);
  SeedModel m;
  m.seed = seed;
  const std::size_t na = 2 + rng.below(6);
  const std::size_t nr = 2 + rng.below(3);
  m.base.axes = AxisSpec::uniform(na, nr);
  const double p0 = 0.3 + 0.4 * rng.uniform();
  const auto c0 = dirichlet2(rng, na);
  const auto c1 = dirichlet2(rng, na);
  m.base.joint_ag = joint_from(p0, c0, c1);
  m.base.u0 = project_cperp(normals(rng, nr, 0.5));
  m.base.v0 = project_cperp(normals(rng, nr, 0.5));
  m.base.u_delta.assign(nr, 0.0);
  m.base.v_delta.assign(nr, 0.0);
  // Uniform: direction on the unit sphere of the v block. Nonuniform: a
  // generic direction in the whole (u, v) space.
  m.uniform = unit(std::vector<double>(nr, 0.0), normals(rng, nr, 1.0));
  std::vector<double> du = normals(rng, nr, 1.0);
  std::vector<double> dvv = normals(rng, nr, 1.0);
  m.nonuniform = unit(std::move(du), std::move(dvv));
  return m;
}

}  // namespace

void BockModel::validate() const {
  axes.validate();
  const std::size_t nr = axes.num_responses();
  if (joint_ag.size() != 2 * axes.num_abilities())
    throw InvalidArgument("joint_ag must have one entry per (a, g)");
  double total = 0.0;
  for (double p : joint_ag) {
    if (!(p > 0.0)) throw InvalidArgument("joint_ag must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("joint_ag must sum to 1");
  for (const auto* v : {&u0, &v0, &u_delta, &v_delta})
    if (v->size() != nr) throw InvalidArgument("response parameter vectors must have |R| entries");
}

std::string to_string(DifVectorKind kind) {
  switch (kind) {
    case DifVectorKind::zero: return "zero";
    case DifVectorKind::uniform_unit: return "uniform1";
    case DifVectorKind::uniform_double: return "uniform2";
    case DifVectorKind::nonuniform_unit: return "nonuniform1";
    case DifVectorKind::nonuniform_double: return "nonuniform2";
  }
  return "unknown";
}

DifVectorKind parse_dif_kind(std::string_view text) {
  for (DifVectorKind k : kAllDifKinds)
    if (to_string(k) == text) return k;
  throw InvalidArgument("unknown DIF vector kind '" + std::string(text) + "'");
}

std::vector<double> project_cperp(const std::vector<double>& x) {
  if (x.empty()) return {};
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mean;
  return out;
}

std::vector<double> bock_conditional(const BockModel& model, std::size_t a, int g) {
  const std::size_t nr = model.axes.num_responses();
  if (a >= model.axes.num_abilities() || (g != 0 && g != 1))
    throw InvalidArgument("bock_conditional: (a, g) out of range");
  const double ad = static_cast<double>(model.axes.ability_levels[a]);
  const double gd = static_cast<double>(g);
  std::vector<double> p(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    const double u = model.u0[r] + gd * model.u_delta[r];
    const double v = model.v0[r] + gd * model.v_delta[r];
    p[r] = u * ad + v;
  }
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& x : p) total += (x = std::exp(x - top));
  for (double& x : p) x /= total;
  return p;
}

BockModel SeedModel::with(DifVectorKind kind) const {
  BockModel m = base;
  double scale = 0.0;
  const DifVector* d = &uniform;
  switch (kind) {
    case DifVectorKind::zero: break;
    case DifVectorKind::uniform_unit: scale = 1.0; break;
    case DifVectorKind::uniform_double: scale = 2.0; break;
    case DifVectorKind::nonuniform_unit: scale = 1.0; d = &nonuniform; break;
    case DifVectorKind::nonuniform_double: scale = 2.0; d = &nonuniform; break;
  }
  for (std::size_t r = 0; r < m.u_delta.size(); ++r) {
    m.u_delta[r] = scale * d->u[r];
    m.v_delta[r] = scale * d->v[r];
  }
  return m;
}

bool is_fixture_seed(std::uint64_t seed) { return fixture().contains(std::to_string(seed)); }

SeedModel make_model(std::uint64_t seed) {
  const std::string key = std::to_string(seed);
  if (fixture().contains(key)) return from_fixture(seed, fixture().at(key));
  return generated(seed);
}

DifConclusion classify_true_dif(const std::vector<double>& u_delta,
                                const std::vector<double>& v_delta) {
  constexpr double eps = 1e-12;
  auto zero = [](const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [](double t) { return std::abs(t) <= eps; });
  };
  if (!zero(u_delta)) return DifConclusion::nonuniform;
  return zero(v_delta) ? DifConclusion::no_dif : DifConclusion::uniform;
}

LogisticCoefficients tau_mapping(const BockModel& model) {
  if (!model.axes.dichotomous()) throw InvalidArgument("tau mapping needs a dichotomous model");
  LogisticCoefficients c;
  c.level = Level::full;
  c.tau = {model.v0[1] - model.v0[0], model.u0[1] - model.u0[0],
           model.v_delta[1] - model.v_delta[0], model.u_delta[1] - model.u_delta[0]};
  return c;
}

ContingencyTable sample_table(const BockModel& model, std::int64_t n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample size must be at least 1");
  model.validate();
  const std::size_t na = model.axes.num_abilities(), nr = model.axes.num_responses();
  std::vector<double> cdf;
  cdf.reserve(na * 2 * nr);
  double acc = 0.0;
  for (std::size_t a = 0; a < na; ++a)
    for (int g = 0; g < 2; ++g) {
      const auto p = bock_conditional(model, a, g);
      for (std::size_t r = 0; r < nr; ++r) cdf.push_back(acc += model.joint_ag[2 * a + g] * p[r]);
    }
  std::vector<Count> counts(cdf.size(), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return ContingencyTable(model.axes, std::move(counts));
}

void SimulationPlan::validate() const {
  if (seeds.empty()) throw InvalidArgument("plan needs at least one seed");
  if (sample_sizes.empty()) throw InvalidArgument("plan needs at least one sample size");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 1) throw InvalidArgument("sample sizes must be positive");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
      throw InvalidArgument("sample sizes must be increasing");
  }
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  if (kinds.empty()) throw InvalidArgument("plan needs at least one DIF vector kind");
  if (analyses.empty()) throw InvalidArgument("plan needs at least one analysis");
}

std::vector<std::int64_t> SimulationPlan::default_sizes() {
  std::vector<std::int64_t> s;
  for (std::int64_t n = 25; n <= 12800; n *= 2) s.push_back(n);
  return s;
}

SimulationPlan read_plan(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan file: ") + e.what());
  }
  SimulationPlan plan;
  try {
    plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    plan.sample_sizes = j.contains("sample_sizes")
                            ? j.at("sample_sizes").get<std::vector<std::int64_t>>()
                            : SimulationPlan::default_sizes();
    plan.replicates = j.value("replicates", 500);
    if (j.contains("kinds")) {
      plan.kinds.clear();
      for (const auto& k : j.at("kinds")) plan.kinds.push_back(parse_dif_kind(k.get<std::string>()));
    }
    if (j.contains("analyses")) {
      for (const auto& a : j.at("analyses")) {
        AnalysisSpec s;
        s.family = parse_family(a.value("family", std::string("loglinear")));
        s.strategy = parse_strategy(a.value("strategy", std::string("asymptotic")));
        s.variant = parse_variant(a.value("variant", std::string("standard")));
        s.alpha = a.value("alpha", 0.05);
        s.heuristic_gated = a.value("heuristic_gated", false);
        s.test_full = a.value("test_full", false);
        s.walk.iterations = a.value("iterations", s.walk.iterations);
        s.walk.burn_in = a.value("burn_in", s.walk.burn_in);
        s.walk.thinning = a.value("thinning", s.walk.thinning);
        s.exact.allow_lattice = a.value("allow_lattice", false);
        plan.analyses.push_back(s);
      }
    } else {
      for (auto fam : {FamilyKind::loglinear, FamilyKind::logistic})
        for (auto st : {Strategy::asymptotic, Strategy::exact}) {
          AnalysisSpec s;
          s.family = fam;
          s.strategy = st;
          s.test_full = false;
          plan.analyses.push_back(s);
        }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan file: ") + e.what());
  }
  plan.validate();
  return plan;
}

double CurveCell::rate(DifConclusion c) const {
  return replicates == 0 ? 0.0
                         : static_cast<double>(conclusions[static_cast<std::size_t>(c)]) / replicates;
}

double CurveCell::error_rate() const {
  return replicates == 0 ? 0.0 : static_cast<double>(errors) / replicates;
}

double CurveCell::detection_rate() const {
  return rate(DifConclusion::uniform) + rate(DifConclusion::nonuniform) +
         rate(DifConclusion::unclassifiable);
}

namespace {

struct Outcome {
  bool applicable = false;
  bool error = false;
  DifConclusion conclusion = DifConclusion::no_dif;
  bool exist_c = false, exist_no3w = false, heur_c = false, heur_no3w = false;
};

bool applicable(const AnalysisSpec& s, const AxisSpec& axes) {
  return s.family != FamilyKind::logistic || axes.dichotomous();
}

std::uint64_t cell_index(DifVectorKind kind, std::int64_t n, int rep) {
  return (static_cast<std::uint64_t>(kind) << 56) ^ (static_cast<std::uint64_t>(n) << 24) ^
         static_cast<std::uint64_t>(rep);
}

}  // namespace

StudyResult run_study(const SimulationPlan& plan, int jobs) {
  plan.validate();
  StudyResult out;
  for (auto s : plan.seeds) out.models.push_back(make_model(s));

  const std::size_t ns = plan.seeds.size(), nk = plan.kinds.size(), nn = plan.sample_sizes.size(),
                    nrep = static_cast<std::size_t>(plan.replicates), na = plan.analyses.size();
  const std::size_t tasks = ns * nk * nn * nrep;
  std::vector<Outcome> outcomes(tasks * na);

  auto run_task = [&](std::size_t t) {
    const std::size_t rep = t % nrep, in = (t / nrep) % nn, ik = (t / nrep / nn) % nk,
                      is = t / nrep / nn / nk;
    const SeedModel& sm = out.models[is];
    const DifVectorKind kind = plan.kinds[ik];
    const std::int64_t n = plan.sample_sizes[in];
    Rng rng = Rng::stream(sm.seed, cell_index(kind, n, static_cast<int>(rep)));
    const BockModel model = sm.with(kind);
    const ContingencyTable table = sample_table(model, n, rng);
    const std::uint64_t walk_base = rng.next();

    // Existence and heuristic per family, shared by the analyses of a family.
    std::map<FamilyKind, std::array<bool, 4>> diag;
    for (std::size_t j = 0; j < na; ++j) {
      const AnalysisSpec& spec = plan.analyses[j];
      Outcome& o = outcomes[t * na + j];
      if (!applicable(spec, table.axes())) continue;
      o.applicable = true;
      auto it = diag.find(spec.family);
      if (it == diag.end()) {
        std::array<bool, 4> d{};
        int k = 0;
        for (Level lv : {Level::cond_indep, Level::no3way}) {
          const ModelFamily fam = spec.family == FamilyKind::logistic ? ModelFamily::logistic(lv)
                                                                      : ModelFamily::loglinear(lv);
          try {
            const AsymptoticResult r = asymptotic_test(table, fam);
            d[k] = r.existence.exists;
            d[k + 2] = r.gof && r.gof->heuristic_met;
          } catch (const std::exception&) {
          }
          ++k;
        }
        it = diag.emplace(spec.family, d).first;
      }
      o.exist_c = it->second[0];
      o.exist_no3w = it->second[1];
      o.heur_c = it->second[2];
      o.heur_no3w = it->second[3];
      AnalysisSpec s = spec;
      s.walk.seed = Rng::stream(walk_base, j).next();
      try {
        o.conclusion = analyze(table, s).conclusion;
      } catch (const std::exception&) {
        o.error = true;
      }
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) run_task(t);
  };
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(tasks, 1))));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t is = 0; is < ns; ++is)
    for (std::size_t ik = 0; ik < nk; ++ik) {
      const BockModel model = out.models[is].with(plan.kinds[ik]);
      const DifConclusion truth = classify_true_dif(model.u_delta, model.v_delta);
      for (std::size_t in = 0; in < nn; ++in)
        for (std::size_t j = 0; j < na; ++j) {
          CurveCell c;
          c.seed = out.models[is].seed;
          c.kind = plan.kinds[ik];
          c.n = plan.sample_sizes[in];
          c.analysis = plan.analyses[j].name();
          c.truth = truth;
          for (std::size_t rep = 0; rep < nrep; ++rep) {
            const std::size_t t = ((is * nk + ik) * nn + in) * nrep + rep;
            const Outcome& o = outcomes[t * na + j];
            if (!o.applicable) continue;
            ++c.replicates;
            if (o.error)
              ++c.errors;
            else
              ++c.conclusions[static_cast<std::size_t>(o.conclusion)];
            c.mle_exist_c += o.exist_c;
            c.mle_exist_no3w += o.exist_no3w;
            c.heuristic_c += o.heur_c;
            c.heuristic_no3w += o.heur_no3w;
          }
          if (c.replicates > 0) out.cells.push_back(std::move(c));
        }
    }
  return out;
}

void write_study_csv(std::ostream& out, const StudyResult& result) {
  out << "seed,dif_kind,n,analysis,conclusion,rate,mle_exist_c,mle_exist_no3w,heuristic_c,"
         "heuristic_no3w\n";
  char buf[64];
  auto fmt = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };
  for (const CurveCell& c : result.cells) {
    const double reps = c.replicates;
    const std::string tail = "," + fmt(c.mle_exist_c / reps) + "," + fmt(c.mle_exist_no3w / reps) +
                             "," + fmt(c.heuristic_c / reps) + "," + fmt(c.heuristic_no3w / reps);
    auto row = [&](const std::string& label, double rate) {
      out << c.seed << ',' << to_string(c.kind) << ',' << c.n << ',' << c.analysis << ',' << label
          << ',' << fmt(rate) << tail << '\n';
    };
    for (DifConclusion k : {DifConclusion::no_dif, DifConclusion::uniform, DifConclusion::nonuniform,
                            DifConclusion::failure, DifConclusion::unclassifiable})
      row(to_string(k), c.rate(k));
    if (c.errors > 0) row("error", c.error_rate());
  }
}

}  // namespace exactdif
