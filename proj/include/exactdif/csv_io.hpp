#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "exactdif/table.hpp"

namespace exactdif {

/// How to read a respondent-level file: one row per respondent with a raw
/// ability score, a 0/1 group, and one column per item.
struct RespondentSchema {
  std::string ability_column = "total";
  std::string group_column = "major";
  /// Empty means: every column whose name starts with "Item", or failing
  /// that every column other than ability and group.
  std::vector<std::string> item_columns;
  int bins = 6;
};

struct ItemTable {
  std::string name;
  ContingencyTable table;
};

/// Reads either a respondent-level file or a long tabulated file with
/// columns `a,g,r,count` (optionally preceded by an `item` column). The
/// format is detected from the header. Empty input yields an empty list.
std::vector<ItemTable> read_csv(const std::filesystem::path& path,
                                const RespondentSchema& schema = {});
std::vector<ItemTable> read_csv(std::istream& in, const RespondentSchema& schema = {});

/// Long format, one line per cell, `item,a,g,r,count`.
void write_long_csv(std::ostream& out, const std::vector<ItemTable>& items);

}  // namespace exactdif
