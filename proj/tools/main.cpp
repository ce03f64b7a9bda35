// exactdif command-line tool.

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exactdif/basis_cache.hpp"
#include "exactdif/error.hpp"
#include "exactdif/examples.hpp"
#include "exactdif/oracle.hpp"
#include "exactdif/report.hpp"
#include "exactdif/simulate.hpp"

using namespace exactdif;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string path;  // empty: the bundled HCI item 17
  std::string item;
  int bins = 6;
  std::string ability_column = "total";
  std::string group_column = "major";
};

struct WalkOptions {
  int iterations = 10000, burn_in = 1000, thinning = 10;
  std::uint64_t seed = 1;
  bool allow_lattice = false;
};

struct Global {
  bool no_timestamp = false;
};

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("input", in.path, "CSV file (respondent-level or long a,g,r,count); "
                                    "defaults to the bundled HCI item 17 table");
  cmd->add_option("--item", in.item, "item name, or the number after 'Item'");
  cmd->add_option("--bins", in.bins, "ability bins for respondent-level files")->check(CLI::Range(1, 1000));
  cmd->add_option("--ability-column", in.ability_column, "raw score column");
  cmd->add_option("--group-column", in.group_column, "0/1 group column");
}

void add_walk(CLI::App* cmd, WalkOptions& w) {
  cmd->add_option("--iter", w.iterations, "Metropolis-Hastings iterations");
  cmd->add_option("--burn", w.burn_in, "burn-in iterations");
  cmd->add_option("--thin", w.thinning, "keep every k-th state after burn-in");
  cmd->add_option("--seed", w.seed, "RNG seed (recorded in the output)");
  cmd->add_flag("--allow-lattice", w.allow_lattice,
                "fall back to a lattice basis (not guaranteed connected) when the "
                "Markov basis exceeds its limits");
}

std::vector<ItemTable> load_items(const InputOptions& in) {
  if (in.path.empty()) return {hci_item17()};
  RespondentSchema schema;
  schema.bins = in.bins;
  schema.ability_column = in.ability_column;
  schema.group_column = in.group_column;
  auto items = read_csv(in.path, schema);
  if (items.empty()) throw UsageError("no items found in " + in.path);
  return items;
}

ItemTable select_item(const std::vector<ItemTable>& items, const std::string& name) {
  if (name.empty()) {
    if (items.size() == 1) return items.front();
    throw UsageError("input has " + std::to_string(items.size()) + " items; choose one with --item");
  }
  for (const auto& it : items)
    if (it.name == name || it.name == "Item" + name) return it;
  throw UsageError("item '" + name + "' not found");
}

ModelFamily family_of(const std::string& family, const std::string& level) {
  const Level lv = parse_level(level);
  switch (parse_family(family)) {
    case FamilyKind::loglinear: return ModelFamily::loglinear(lv);
    case FamilyKind::logistic: return ModelFamily::logistic(lv);
    case FamilyKind::cmh: return ModelFamily::cmh(lv);
  }
  throw UsageError("unknown family");
}

void apply_walk(AnalysisSpec& spec, const WalkOptions& w) {
  spec.walk.iterations = w.iterations;
  spec.walk.burn_in = w.burn_in;
  spec.walk.thinning = w.thinning;
  spec.walk.seed = w.seed;
  spec.exact.allow_lattice = w.allow_lattice;
}

void print(const Global& g, Json payload) {
  std::cout << envelope(std::move(payload), g.no_timestamp ? "" : utc_timestamp()).dump(2) << '\n';
}

Json table_json(const ItemTable& it) {
  return Json{{"item", it.name}, {"shape", it.table.axes().shape_string()},
              {"counts", std::vector<Count>(it.table.natural_counts().begin(), it.table.natural_counts().end())}};
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& s : raw) {
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

AxisSpec parse_shape(const std::string& shape) {
  std::vector<std::size_t> dims;
  std::stringstream ss(shape);
  std::string part;
  try {
    while (std::getline(ss, part, 'x')) dims.push_back(std::stoul(part));
  } catch (const std::exception&) {
    throw UsageError("bad --shape '" + shape + "' (expected AxR or Ax2xR)");
  }
  if (dims.size() == 3 && dims[1] == 2) return AxisSpec::uniform(dims[0], dims[2]);
  if (dims.size() == 2) return AxisSpec::uniform(dims[0], dims[1]);
  throw UsageError("bad --shape '" + shape + "' (expected AxR or Ax2xR)");
}

Json count_json(const BigInt& c) {
  if (c <= std::numeric_limits<std::uint64_t>::max()) return static_cast<std::uint64_t>(c);
  return c.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and asymptotic DIF analysis of three-way contingency tables"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("exactdif ") + EXACTDIF_VERSION +
                                        " (basis format v" + std::to_string(kBasisFormatVersion) + ")");
  Global global;
  app.add_flag("--no-timestamp", global.no_timestamp, "omit the generated_at field from JSON");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "two-step DIF analysis of one item");
  InputOptions a_in;
  WalkOptions a_walk;
  std::string a_family = "loglinear", a_strategy = "asymptotic", a_variant = "standard";
  double a_alpha = 0.05;
  bool a_gated = false;
  add_input(analyze_cmd, a_in);
  add_walk(analyze_cmd, a_walk);
  analyze_cmd->add_option("--family", a_family, "loglinear | logistic");
  analyze_cmd->add_option("--strategy", a_strategy, "asymptotic | exact");
  analyze_cmd->add_option("--variant", a_variant, "standard | swapped | nested");
  analyze_cmd->add_option("--alpha", a_alpha, "significance level");
  analyze_cmd->add_flag("--heuristic-gated", a_gated,
                        "treat an unmet 80%-of-expected-counts>=5 heuristic like a missing MLE");

  // batch
  auto* batch_cmd = app.add_subcommand("batch", "analyze every item; summary CSV");
  InputOptions b_in;
  WalkOptions b_walk;
  std::vector<std::string> b_families{"loglinear,logistic"}, b_strategies{"asymptotic,exact"};
  std::vector<int> b_bins{6};
  std::string b_variant = "standard", b_json, b_out;
  double b_alpha = 0.05;
  int b_jobs = 1;
  batch_cmd->add_option("input", b_in.path, "CSV file")->required();
  batch_cmd->add_option("--bins", b_bins, "ability bin counts, e.g. 6,9")->delimiter(',');
  batch_cmd->add_option("--ability-column", b_in.ability_column, "raw score column");
  batch_cmd->add_option("--group-column", b_in.group_column, "0/1 group column");
  add_walk(batch_cmd, b_walk);
  batch_cmd->add_option("--family", b_families, "comma-separated families");
  batch_cmd->add_option("--strategy", b_strategies, "comma-separated strategies");
  batch_cmd->add_option("--variant", b_variant, "standard | swapped | nested");
  batch_cmd->add_option("--alpha", b_alpha, "significance level");
  batch_cmd->add_option("--jobs", b_jobs, "worker threads")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--json", b_json, "write per-item detail JSON here");
  batch_cmd->add_option("--out", b_out, "write the CSV here instead of standard output");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Bock-model simulation study; tidy CSV");
  std::string s_plan, s_out;
  std::vector<std::uint64_t> s_seeds;
  std::vector<std::int64_t> s_sizes;
  std::vector<std::string> s_families{"loglinear,logistic"}, s_strategies{"asymptotic,exact"};
  int s_reps = 500, s_jobs = 1;
  WalkOptions s_walk;
  sim_cmd->add_option("--plan", s_plan, "JSON plan file (other flags are ignored)");
  sim_cmd->add_option("--seeds", s_seeds, "model seeds")->delimiter(',');
  sim_cmd->add_option("--sizes", s_sizes, "increasing sample sizes")->delimiter(',');
  sim_cmd->add_option("--replicates", s_reps, "replicates per cell")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--family", s_families, "comma-separated families");
  sim_cmd->add_option("--strategy", s_strategies, "comma-separated strategies");
  sim_cmd->add_option("--iter", s_walk.iterations, "Metropolis-Hastings iterations");
  sim_cmd->add_option("--burn", s_walk.burn_in, "burn-in iterations");
  sim_cmd->add_option("--thin", s_walk.thinning, "thinning");
  sim_cmd->add_option("--jobs", s_jobs, "worker threads")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--out", s_out, "write the CSV here instead of standard output");

  // fiber
  auto* fiber_cmd = app.add_subcommand("fiber", "exhaustive fiber enumeration");
  fiber_cmd->require_subcommand(1);
  InputOptions f_in;
  std::string f_family = "loglinear", f_level = "c";
  std::optional<std::uint64_t> f_cap;
  bool f_no_cap = false;
  auto* fcount = fiber_cmd->add_subcommand("count", "number of tables in the fiber (uncapped by default)");
  auto* fenum = fiber_cmd->add_subcommand("enumerate", "list the fiber's tables (canonical cell order)");
  for (auto* c : {fcount, fenum}) {
    add_input(c, f_in);
    c->add_option("--family", f_family, "loglinear | logistic | cmh");
    c->add_option("--level", f_level, "c | no3w | full");
    c->add_option("--cap", f_cap, "stop after this many tables");
    c->add_flag("--no-cap", f_no_cap, "never stop early");
  }

  // markov
  auto* markov_cmd = app.add_subcommand("markov", "compute and export a Markov basis");
  InputOptions m_in;
  std::string m_family = "loglinear", m_level = "c", m_shape, m_format = "text", m_output;
  bool m_lattice = false;
  add_input(markov_cmd, m_in);
  markov_cmd->add_option("--family", m_family, "loglinear | logistic | cmh");
  markov_cmd->add_option("--level", m_level, "c | no3w | full");
  markov_cmd->add_option("--shape", m_shape, "table shape AxR or Ax2xR instead of an input file");
  markov_cmd->add_option("--format", m_format, "text | json")->check(CLI::IsMember({"text", "json"}));
  markov_cmd->add_option("-o,--output", m_output, "write the basis here instead of standard output");
  markov_cmd->add_flag("--allow-lattice", m_lattice, "fall back to a lattice basis past the limits");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "MLE existence, fit and chi-square test of one model");
  InputOptions t_in;
  std::string t_family = "loglinear", t_level = "c";
  add_input(fit_cmd, t_in);
  fit_cmd->add_option("--family", t_family, "loglinear | logistic | cmh");
  fit_cmd->add_option("--level", t_level, "c | no3w | full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze_cmd) {
      const ItemTable it = select_item(load_items(a_in), a_in.item);
      AnalysisSpec spec;
      spec.family = parse_family(a_family);
      spec.strategy = parse_strategy(a_strategy);
      spec.variant = parse_variant(a_variant);
      spec.alpha = a_alpha;
      spec.heuristic_gated = a_gated;
      apply_walk(spec, a_walk);
      const ItemReport rep = analyze(it.table, spec, it.name);
      print(global, Json{{"command", "analyze"},
                         {"input", a_in.path.empty() ? "builtin:hci-item17" : a_in.path},
                         {"table", table_json(it)},
                         {"analysis", to_json(spec)},
                         {"result", to_json(rep)}});
    } else if (*batch_cmd) {
      std::vector<SummaryBlock> blocks;
      Json detail = Json::array();
      for (int bins : b_bins) {
        InputOptions in = b_in;
        in.bins = bins;
        const auto items = load_items(in);
        for (const auto& fam : split_list(b_families))
          for (const auto& strat : split_list(b_strategies)) {
            AnalysisSpec spec;
            spec.family = parse_family(fam);
            spec.strategy = parse_strategy(strat);
            spec.variant = parse_variant(b_variant);
            spec.alpha = b_alpha;
            apply_walk(spec, b_walk);
            if (spec.family == FamilyKind::logistic && !items.front().table.axes().dichotomous())
              continue;
            if (spec.variant == Variant::nested_augmented && spec.strategy == Strategy::exact)
              continue;
            SummaryBlock block{bins, batch_analyze(items, spec, b_jobs)};
            Json j = to_json(block.result);
            j["bins"] = bins;
            detail.push_back(std::move(j));
            blocks.push_back(std::move(block));
          }
      }
      if (b_out.empty()) {
        write_summary_csv(std::cout, blocks);
      } else {
        std::ofstream f(b_out);
        if (!f) throw UsageError("cannot write " + b_out);
        write_summary_csv(f, blocks);
      }
      if (!b_json.empty()) {
        std::ofstream f(b_json);
        if (!f) throw UsageError("cannot write " + b_json);
        f << envelope(Json{{"command", "batch"}, {"input", b_in.path}, {"blocks", detail}},
                      global.no_timestamp ? "" : utc_timestamp())
                 .dump(2)
          << '\n';
      }
    } else if (*sim_cmd) {
      SimulationPlan plan;
      if (!s_plan.empty()) {
        std::ifstream f(s_plan);
        if (!f) throw UsageError("cannot read " + s_plan);
        plan = read_plan(f);
      } else {
        plan.seeds = s_seeds.empty() ? std::vector<std::uint64_t>{1930, 1947, 1948} : s_seeds;
        plan.sample_sizes = s_sizes.empty() ? SimulationPlan::default_sizes() : s_sizes;
        plan.replicates = s_reps;
        for (const auto& fam : split_list(s_families))
          for (const auto& strat : split_list(s_strategies)) {
            AnalysisSpec spec;
            spec.family = parse_family(fam);
            spec.strategy = parse_strategy(strat);
            spec.test_full = false;
            apply_walk(spec, s_walk);
            plan.analyses.push_back(spec);
          }
      }
      const StudyResult res = run_study(plan, s_jobs);
      if (s_out.empty()) {
        write_study_csv(std::cout, res);
      } else {
        std::ofstream f(s_out);
        if (!f) throw UsageError("cannot write " + s_out);
        write_study_csv(f, res);
      }
    } else if (*fiber_cmd) {
      const ItemTable it = select_item(load_items(f_in), f_in.item);
      const ModelFamily fam = family_of(f_family, f_level);
      const ConfigurationMatrix config = configuration(fam, it.table.axes());
      const auto stats = sufficient_statistics(config, it.table);
      Json out{{"command", *fcount ? "fiber count" : "fiber enumerate"},
               {"model", fam.name()},
               {"table", table_json(it)}};
      if (*fcount) {
        const std::optional<std::uint64_t> cap = f_no_cap ? std::nullopt : f_cap;
        out["count"] = count_json(fiber_count(config, stats, cap));
      } else {
        const std::optional<std::uint64_t> cap =
            f_no_cap ? std::nullopt : std::optional<std::uint64_t>(f_cap.value_or(kDefaultFiberCap));
        const FiberEnumeration e = enumerate_fiber(config, stats, cap, true);
        out["truncated"] = e.truncated;
        if (!e.truncated) out["count"] = count_json(e.count);
        out["tables"] = e.tables;
      }
      print(global, std::move(out));
    } else if (*markov_cmd) {
      AxisSpec axes;
      if (!m_shape.empty()) {
        if (!m_in.path.empty()) throw UsageError("give either --shape or an input file, not both");
        axes = parse_shape(m_shape);
      } else {
        axes = select_item(load_items(m_in), m_in.item).table.axes();
      }
      const ConfigurationMatrix config = configuration(family_of(m_family, m_level), axes);
      const MarkovBasis basis = cached_markov_basis(config, BasisCache::from_environment(), m_lattice);
      std::ostringstream text;
      if (m_format == "text") {
        write_basis(text, basis);
      } else {
        text << envelope(Json{{"command", "markov"},
                              {"model", family_of(m_family, m_level).name()},
                              {"shape", axes.shape_string()},
                              {"fingerprint", basis.fingerprint},
                              {"kind", to_string(basis.kind)},
                              {"num_moves", basis.moves.size()},
                              {"moves", basis.moves}},
                         global.no_timestamp ? "" : utc_timestamp())
                    .dump(2)
             << '\n';
      }
      if (m_output.empty()) {
        std::cout << text.str();
      } else {
        std::ofstream f(m_output);
        if (!f) throw UsageError("cannot write " + m_output);
        f << text.str();
      }
    } else if (*fit_cmd) {
      const ItemTable it = select_item(load_items(t_in), t_in.item);
      const ModelFamily fam = family_of(t_family, t_level);
      print(global, Json{{"command", "fit"},
                         {"table", table_json(it)},
                         {"result", to_json(asymptotic_test(it.table, fam), fam)}});
    }
  } catch (const UsageError& e) {
    std::cerr << error_json("usage", e.what()).dump() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << error_json("invalid_argument", e.what()).dump() << '\n';
    return 2;
  } catch (const exactdif::ParseError& e) {
    std::cerr << error_json("parse_error", e.what()).dump() << '\n';
    return 2;
  } catch (const BasisTooLarge& e) {
    std::cerr << error_json("basis_too_large", e.what()).dump() << '\n';
    return 1;
  } catch (const MleNonexistent& e) {
    std::cerr << error_json("mle_nonexistent", e.what()).dump() << '\n';
    return 1;
  } catch (const EnumerationTruncated& e) {
    std::cerr << error_json("enumeration_truncated", e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("error", e.what()).dump() << '\n';
    return 1;
  }
  return 0;
}
