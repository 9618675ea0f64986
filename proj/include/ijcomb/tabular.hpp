#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ijcomb/data.hpp"

namespace ijcomb {

struct TabularSchema {
  std::string target;
  bool log_target = false;
  std::vector<std::string> categorical;  // expanded to one indicator per level
  std::vector<std::string> drop;         // ignored entirely
  bool drop_missing = true;              // otherwise a missing cell is an error
};

struct TabularData {
  Dataset data;
  std::vector<std::string> columns;  // names of the columns of data.X
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

/// Splits one CSV record; handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a headed CSV. Empty cells and NA / NaN / null count as missing.
/// Non-categorical columns must be numeric. Indicator columns are named
/// "column=level" and levels are sorted lexicographically.
TabularData ingest_csv(std::istream& in, const TabularSchema& schema);
TabularData ingest_csv(const std::string& path, const TabularSchema& schema);

}  // namespace ijcomb
