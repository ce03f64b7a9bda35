#include "exactdif/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "exactdif/error.hpp"

namespace exactdif {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cur += c;
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN"; }

std::optional<double> parse_double(const std::string& s) {
  if (is_missing(s)) return std::nullopt;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != s.size()) return std::nullopt;
  return v;
}

std::int64_t parse_int(const std::string& s, std::size_t line_no, const char* what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": " + what + " \"" + s +
                     "\" is not an integer");
  return v;
}

// Numeric labels sort numerically, everything else lexicographically.
std::vector<std::string> sorted_labels(const std::set<std::string>& labels) {
  std::vector<std::string> v(labels.begin(), labels.end());
  const bool numeric = std::all_of(v.begin(), v.end(), [](const std::string& s) {
    return parse_double(s).has_value();
  });
  if (numeric)
    std::sort(v.begin(), v.end(), [](const std::string& x, const std::string& y) {
      return *parse_double(x) < *parse_double(y);
    });
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError("column \"" + name + "\" not found in header");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<ItemTable> read_long(const std::vector<std::string>& header,
                                 const std::vector<std::pair<std::size_t, std::string>>& lines) {
  const bool has_item = std::find(header.begin(), header.end(), "item") != header.end();
  const std::size_t ia = column_index(header, "a"), ig = column_index(header, "g"),
                    ir = column_index(header, "r"), ic = column_index(header, "count");
  const std::size_t iitem = has_item ? column_index(header, "item") : 0;

  struct Row {
    std::int64_t a, g;
    std::string r;
    std::int64_t count;
  };
  std::vector<std::string> item_order;
  std::map<std::string, std::vector<Row>> rows;
  for (const auto& [line_no, line] : lines) {
    auto f = split_line(line);
    if (f.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    std::string item = has_item ? f[iitem] : "1";
    Row row{parse_int(f[ia], line_no, "ability"), parse_int(f[ig], line_no, "group"), f[ir],
            parse_int(f[ic], line_no, "count")};
    if (row.count < 0) throw ParseError("line " + std::to_string(line_no) + ": negative count");
    if (row.a < 0) throw ParseError("line " + std::to_string(line_no) + ": negative ability level");
    if (row.g != 0 && row.g != 1)
      throw ParseError("line " + std::to_string(line_no) + ": group must be 0 or 1");
    if (!rows.contains(item)) item_order.push_back(item);
    rows[item].push_back(std::move(row));
  }
  std::vector<ItemTable> out;
  for (const auto& item : item_order) {
    const auto& rs = rows[item];
    std::set<std::int64_t> abilities;
    std::set<std::string> responses;
    for (const auto& r : rs) {
      abilities.insert(r.a);
      responses.insert(r.r);
    }
    AxisSpec axes(std::vector<std::int64_t>(abilities.begin(), abilities.end()),
                  sorted_labels(responses));
    std::vector<Count> counts(axes.num_cells(), 0);
    for (const auto& r : rs) {
      auto a = static_cast<std::size_t>(
          std::lower_bound(axes.ability_levels.begin(), axes.ability_levels.end(), r.a) -
          axes.ability_levels.begin());
      auto rr = static_cast<std::size_t>(
          std::find(axes.response_levels.begin(), axes.response_levels.end(), r.r) -
          axes.response_levels.begin());
      counts[(a * 2 + static_cast<std::size_t>(r.g)) * axes.num_responses() + rr] += r.count;
    }
    out.push_back({item, ContingencyTable(std::move(axes), std::move(counts))});
  }
  return out;
}

std::vector<ItemTable> read_respondents(
    const std::vector<std::string>& header,
    const std::vector<std::pair<std::size_t, std::string>>& lines, const RespondentSchema& schema) {
  const std::size_t iab = column_index(header, schema.ability_column);
  const std::size_t igr = column_index(header, schema.group_column);
  std::vector<std::size_t> items;
  if (!schema.item_columns.empty()) {
    for (const auto& name : schema.item_columns) items.push_back(column_index(header, name));
  } else {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i].rfind("Item", 0) == 0) items.push_back(i);
    if (items.empty())
      for (std::size_t i = 0; i < header.size(); ++i)
        if (i != iab && i != igr) items.push_back(i);
  }
  if (items.empty()) throw ParseError("no item columns found");

  std::vector<double> ability;
  std::vector<std::int64_t> group;
  std::vector<std::vector<std::string>> responses(items.size());
  std::set<std::string> labels;
  for (const auto& [line_no, line] : lines) {
    auto f = split_line(line);
    if (f.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    auto x = parse_double(f[iab]);
    if (!x) {
      if (is_missing(f[iab])) continue;
      throw ParseError("line " + std::to_string(line_no) + ": ability \"" + f[iab] +
                       "\" is not numeric");
    }
    if (is_missing(f[igr])) continue;
    auto g = parse_int(f[igr], line_no, "group");
    if (g != 0 && g != 1)
      throw ParseError("line " + std::to_string(line_no) + ": group must be 0 or 1");
    ability.push_back(*x);
    group.push_back(g);
    for (std::size_t j = 0; j < items.size(); ++j) {
      const std::string& v = f[items[j]];
      responses[j].push_back(v);
      if (!is_missing(v)) labels.insert(v);
    }
  }
  if (ability.empty()) return {};
  auto levels = discretize(ability, schema.bins);
  AxisSpec axes = AxisSpec::uniform(static_cast<std::size_t>(schema.bins), 2);
  axes.response_levels = sorted_labels(labels);
  if (axes.response_levels.size() < 2)
    throw ParseError("items need at least two distinct response values");
  axes.validate();

  std::vector<ItemTable> out;
  for (std::size_t j = 0; j < items.size(); ++j) {
    std::vector<Count> counts(axes.num_cells(), 0);
    for (std::size_t i = 0; i < ability.size(); ++i) {
      const std::string& v = responses[j][i];
      if (is_missing(v)) continue;
      auto r = static_cast<std::size_t>(
          std::find(axes.response_levels.begin(), axes.response_levels.end(), v) -
          axes.response_levels.begin());
      counts[(static_cast<std::size_t>(levels[i]) * 2 + static_cast<std::size_t>(group[i])) *
                 axes.num_responses() +
             r] += 1;
    }
    out.push_back({header[items[j]], ContingencyTable(axes, std::move(counts))});
  }
  return out;
}

}  // namespace

std::vector<ItemTable> read_csv(std::istream& in, const RespondentSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    header = split_line(line);
  }
  if (header.empty()) return {};
  std::vector<std::pair<std::size_t, std::string>> lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    lines.emplace_back(line_no, line);
  }
  const bool is_long = std::find(header.begin(), header.end(), "count") != header.end();
  return is_long ? read_long(header, lines) : read_respondents(header, lines, schema);
}

std::vector<ItemTable> read_csv(const std::filesystem::path& path, const RespondentSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_csv(in, schema);
}

void write_long_csv(std::ostream& out, const std::vector<ItemTable>& items) {
  out << "item,a,g,r,count\n";
  for (const auto& it : items) {
    const auto& ax = it.table.axes();
    for (std::size_t a = 0; a < ax.num_abilities(); ++a)
      for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t r = 0; r < ax.num_responses(); ++r)
          out << it.name << ',' << ax.ability_levels[a] << ',' << g << ','
              << ax.response_levels[r] << ',' << it.table.at(a, g, r) << '\n';
  }
}

}  // namespace exactdif
