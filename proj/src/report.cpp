#include "exactdif/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <ostream>

namespace exactdif {
namespace {

Json number_or_null(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

Json to_json(const ExistenceReport& r) {
  Json j{{"exists", r.exists}, {"reason", to_string(r.reason)}};
  if (!r.witness.empty()) j["witness"] = r.witness;
  if (r.reason == ExistenceReason::collapsing_failure) {
    j["ability_block"] = r.ability_block;
    j["response_block"] = r.response_block;
  }
  if (r.reason == ExistenceReason::separation) j["beta"] = r.beta;
  return j;
}

Json to_json(const GofResult& r) {
  return Json{{"g_stat", r.g_stat},          {"pearson_x2", r.pearson_x2},
              {"df", r.df},                  {"p_value", r.p_value},
              {"heuristic_met", r.heuristic_met}, {"pct_expected_ge5", r.pct_expected_ge5}};
}

Json to_json(const LogisticCoefficients& c) {
  return Json{{"level", to_string(c.level)},
              {"tau", std::vector<double>(c.tau.begin(), c.tau.begin() + c.size())}};
}

Json to_json(const ExactTestResult& r) {
  return Json{{"p_value", r.p_value},
              {"mc_stderr", r.mc_stderr},
              {"acceptance_rate", r.acceptance_rate},
              {"basis_kind", to_string(r.basis_kind)},
              {"seed", r.seed},
              {"n_kept", r.n_kept},
              {"num_moves", r.num_moves},
              {"statistic", to_string(r.statistic_kind)},
              {"observed_loguprob", r.observed_loguprob}};
}

Json to_json(const AsymptoticResult& r, const ModelFamily& family) {
  Json j{{"model", family.name()}, {"existence", to_json(r.existence)}};
  if (r.gof) j["gof"] = to_json(*r.gof);
  if (r.coefficients) j["coefficients"] = to_json(*r.coefficients);
  if (r.fit) {
    j["converged"] = r.fit->converged;
    j["iterations"] = r.fit->iterations;
    j["expected"] = r.fit->expected;
  }
  return j;
}

Json to_json(const ModelTest& t) {
  Json j{{"level", to_string(t.level)}, {"p_value", number_or_null(t.p_value)}};
  if (t.exact) {
    j["exact"] = to_json(*t.exact);
  } else {
    j["existence"] = to_json(t.existence);
    if (t.gof) j["gof"] = to_json(*t.gof);
  }
  return j;
}

Json to_json(const ItemReport& r) {
  Json j{{"item", r.item},
         {"conclusion", to_string(r.conclusion)},
         {"p_c", number_or_null(r.p_c)},
         {"p_no3w", number_or_null(r.p_no3w)},
         {"p_full", number_or_null(r.p_full)}};
  if (r.p_nested) j["p_nested"] = *r.p_nested;
  if (r.p_c_adjusted) j["p_c_adjusted"] = *r.p_c_adjusted;
  if (r.p_full_adjusted) j["p_full_adjusted"] = *r.p_full_adjusted;
  j["dagger"] = r.dagger;
  j["star"] = r.star;
  Json tests = Json::array();
  for (const auto& t : r.tests) tests.push_back(to_json(t));
  j["tests"] = std::move(tests);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

Json to_json(const AnalysisSpec& s) {
  Json j{{"family", to_string(s.family)},
         {"strategy", to_string(s.strategy)},
         {"variant", to_string(s.variant)},
         {"alpha", s.alpha},
         {"heuristic_gated", s.heuristic_gated}};
  if (s.strategy == Strategy::exact)
    j["walk"] = Json{{"iterations", s.walk.iterations},
                     {"burn_in", s.walk.burn_in},
                     {"thinning", s.walk.thinning},
                     {"seed", s.walk.seed}};
  return j;
}

Json to_json(const BatchResult& b) {
  Json items = Json::array();
  for (const auto& r : b.items) items.push_back(to_json(r));
  return Json{{"analysis", to_json(b.spec)}, {"items", std::move(items)}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json envelope(Json payload, const std::string& timestamp) {
  Json j{{"exactdif_version", EXACTDIF_VERSION}};
  if (!timestamp.empty()) j["generated_at"] = timestamp;
  for (auto it = payload.begin(); it != payload.end(); ++it) j[it.key()] = it.value();
  return j;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryBlock>& blocks) {
  std::vector<std::string> columns;
  std::vector<std::pair<int, std::string>> rows;
  std::map<std::pair<int, std::string>, std::map<std::string, std::string>> cells;
  for (const auto& b : blocks) {
    const std::string col = b.result.spec.name();
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    for (const auto& r : b.result.items) {
      const auto key = std::make_pair(b.bins, r.item);
      if (!cells.count(key)) rows.push_back(key);
      cells[key][col] = r.error.empty() ? table_cell(r) : "error";
    }
  }
  out << "bins,item";
  for (const auto& c : columns) out << ',' << csv_field(c);
  out << '\n';
  for (const auto& key : rows) {
    out << key.first << ',' << csv_field(key.second);
    const auto& m = cells[key];
    for (const auto& c : columns) {
      auto it = m.find(c);
      out << ',' << (it == m.end() ? std::string() : csv_field(it->second));
    }
    out << '\n';
  }
}

Json error_json(const std::string& kind, const std::string& message) {
  return Json{{"error", kind}, {"message", message}};
}

}  // namespace exactdif
