#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exactdif/dif.hpp"
#include "exactdif/rng.hpp"

namespace exactdif {

/// Bock nominal response model on A x G x R:
///   Pr[R = r | a, g] ∝ exp(u(g, r) a + v(g, r)),  u(g, .) = u0 + g u_delta.
struct BockModel {
  AxisSpec axes;
  std::vector<double> joint_ag;  ///< Pr[A = a, G = g] at index a*2 + g
  std::vector<double> u0, v0, u_delta, v_delta;

  void validate() const;
};

enum class DifVectorKind { zero, uniform_unit, uniform_double, nonuniform_unit, nonuniform_double };
inline constexpr DifVectorKind kAllDifKinds[] = {
    DifVectorKind::zero, DifVectorKind::uniform_unit, DifVectorKind::uniform_double,
    DifVectorKind::nonuniform_unit, DifVectorKind::nonuniform_double};
std::string to_string(DifVectorKind kind);
DifVectorKind parse_dif_kind(std::string_view text);

/// x - mean(x).
std::vector<double> project_cperp(const std::vector<double>& x);

/// Conditional response distribution at (a, g); a is the ability index.
std::vector<double> bock_conditional(const BockModel& model, std::size_t a, int g);

struct DifVector {
  std::vector<double> u, v;
};

/// Everything one seed generates.
struct SeedModel {
  std::uint64_t seed = 0;
  bool from_fixture = false;
  BockModel base;  ///< zero DIF vector
  DifVector uniform, nonuniform;  ///< unit norm

  BockModel with(DifVectorKind kind) const;
};

/// Seeds present in the checked-in seed fixture load from it; any other
/// seed uses the generator documented in the README.
SeedModel make_model(std::uint64_t seed);
bool is_fixture_seed(std::uint64_t seed);

DifConclusion classify_true_dif(const std::vector<double>& u_delta,
                                const std::vector<double>& v_delta);

/// Full-model logistic coefficients implied by a dichotomous Bock model.
LogisticCoefficients tau_mapping(const BockModel& model);

/// One multinomial draw of size n.
ContingencyTable sample_table(const BockModel& model, std::int64_t n, Rng& rng);

struct SimulationPlan {
  std::vector<std::uint64_t> seeds;
  std::vector<std::int64_t> sample_sizes;
  int replicates = 500;
  std::vector<DifVectorKind> kinds{std::begin(kAllDifKinds), std::end(kAllDifKinds)};
  std::vector<AnalysisSpec> analyses;

  void validate() const;
  /// Doubling grid 25, 50, ..., 12800.
  static std::vector<std::int64_t> default_sizes();
};

/// JSON plan: {"seeds": [...], "sample_sizes": [...], "replicates": k,
/// "kinds": [...], "analyses": [{"family", "strategy", "variant", "alpha",
/// "iterations", "burn_in", "thinning"}]}. Missing keys take defaults.
SimulationPlan read_plan(std::istream& in);

struct CurveCell {
  std::uint64_t seed = 0;
  DifVectorKind kind = DifVectorKind::zero;
  std::int64_t n = 0;
  std::string analysis;
  DifConclusion truth = DifConclusion::no_dif;
  int replicates = 0;  ///< replicates this analysis was applicable to
  /// Counts per DifConclusion (indexed by enum value), plus thrown errors.
  std::array<int, 5> conclusions{};
  int errors = 0;
  int mle_exist_c = 0, mle_exist_no3w = 0, heuristic_c = 0, heuristic_no3w = 0;

  double rate(DifConclusion c) const;
  double error_rate() const;
  double correct_rate() const { return rate(truth); }
  /// Any DIF conclusion (uniform, nonuniform or unclassifiable).
  double detection_rate() const;
};

struct StudyResult {
  std::vector<SeedModel> models;
  std::vector<CurveCell> cells;  ///< ordered by seed, kind, n, analysis
};

/// Replicate (seed, kind, n, r) uses Rng::stream(seed, cell index); every
/// analysis sees the same table. Output order is independent of `jobs`.
StudyResult run_study(const SimulationPlan& plan, int jobs = 1);

/// Tidy CSV: seed,dif_kind,n,analysis,conclusion,rate,mle_exist_c,
/// mle_exist_no3w,heuristic_c,heuristic_no3w. Thrown errors appear as
/// conclusion "error".
void write_study_csv(std::ostream& out, const StudyResult& result);

}  // namespace exactdif
