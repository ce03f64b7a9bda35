#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exactdif/dif.hpp"
#include "exactdif/markov.hpp"
#include "exactdif/oracle.hpp"

namespace exactdif {

using Json = nlohmann::ordered_json;

Json to_json(const ExistenceReport& r);
Json to_json(const GofResult& r);
Json to_json(const LogisticCoefficients& c);
Json to_json(const ExactTestResult& r);
Json to_json(const AsymptoticResult& r, const ModelFamily& family);
Json to_json(const ModelTest& t);
Json to_json(const ItemReport& r);
Json to_json(const AnalysisSpec& s);
Json to_json(const BatchResult& b);

/// Wraps a payload in {"exactdif_version", "generated_at", ...payload}. The
/// timestamp is the only nondeterministic field; pass an empty string to
/// omit it.
Json envelope(Json payload, const std::string& timestamp);
std::string utc_timestamp();

/// One block of a batch summary table.
struct SummaryBlock {
  int bins = 0;
  BatchResult result;
};

/// Rows (bins, item), one column per analysis name in first-seen order.
/// Cells read like "nonuniform†"; analyses not run for an item are empty.
void write_summary_csv(std::ostream& out, const std::vector<SummaryBlock>& blocks);

/// Error payload written to standard error by the CLI.
Json error_json(const std::string& kind, const std::string& message);

}  // namespace exactdif
