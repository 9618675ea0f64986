#include "ijcomb/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "ijcomb/error.hpp"

namespace ijcomb {

namespace {

bool is_missing(const std::string& cell) {
  static const std::set<std::string> tokens{"", "NA", "na", "N/A", "NaN", "nan", "null", "NULL"};
  return tokens.contains(cell);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw Error(ErrorKind::io, "unterminated quoted field");
  out.push_back(trim(cell));
  return out;
}

TabularData ingest_csv(std::istream& in, const TabularSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::io, "missing CSV header");
  const std::vector<std::string> header = split_csv_line(line);

  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!index.emplace(header[c], c).second)
      throw Error(ErrorKind::io, "duplicate column '" + header[c] + "'");
  if (!index.contains(schema.target))
    throw Error(ErrorKind::config, "unknown target column '" + schema.target + "'");
  for (const auto& name : schema.categorical)
    if (!index.contains(name)) throw Error(ErrorKind::config, "unknown categorical column '" + name + "'");
  // "col=level" drops one indicator of a categorical column
  auto is_indicator = [&](const std::string& name) {
    const auto eq = name.find('=');
    return eq != std::string::npos && contains(schema.categorical, name.substr(0, eq));
  };
  for (const auto& name : schema.drop)
    if (!index.contains(name) && !is_indicator(name))
      throw Error(ErrorKind::config, "unknown dropped column '" + name + "'");
  if (contains(schema.categorical, schema.target) || contains(schema.drop, schema.target))
    throw Error(ErrorKind::config, "target column cannot be categorical or dropped");

  TabularData result;
  std::vector<std::vector<std::string>> kept;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorKind::io, "line " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " fields, expected " +
                                     std::to_string(header.size()));
    ++result.rows_read;
    bool missing = false;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!contains(schema.drop, header[c]) && is_missing(cells[c])) missing = true;
    if (missing) {
      if (!schema.drop_missing)
        throw Error(ErrorKind::io, "missing value on line " + std::to_string(line_no));
      ++result.rows_dropped;
      continue;
    }
    kept.push_back(std::move(cells));
  }
  if (kept.empty()) throw Error(ErrorKind::empty_data, "no rows left after dropping missing values");

  // Column layout: original order, categoricals expanded in place.
  struct Output {
    std::size_t source;
    std::optional<std::string> level;
  };
  std::vector<Output> layout;
  std::set<std::string> seen_levels;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == schema.target || contains(schema.drop, name)) continue;
    if (contains(schema.categorical, name)) {
      std::set<std::string> levels;
      for (const auto& row : kept) levels.insert(row[c]);
      for (const auto& level : levels) {
        seen_levels.insert(name + "=" + level);
        if (contains(schema.drop, name + "=" + level)) continue;
        layout.push_back({c, level});
        result.columns.push_back(name + "=" + level);
      }
    } else {
      layout.push_back({c, std::nullopt});
      result.columns.push_back(name);
    }
  }

  for (const auto& name : schema.drop)
    if (!index.contains(name) && !seen_levels.contains(name))
      throw Error(ErrorKind::config, "dropped level '" + name + "' never occurs");
  const auto n = static_cast<Eigen::Index>(kept.size());
  const std::size_t target = index.at(schema.target);
  result.data.X.resize(n, static_cast<Eigen::Index>(layout.size()));
  result.data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = kept[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const Output& out = layout[k];
      double value = 0.0;
      if (out.level) {
        value = row[out.source] == *out.level ? 1.0 : 0.0;
      } else if (!parse_number(row[out.source], value)) {
        throw Error(ErrorKind::io, "non-numeric value '" + row[out.source] + "' in column '" +
                                       header[out.source] + "'");
      }
      result.data.X(i, static_cast<Eigen::Index>(k)) = value;
    }
    double y = 0.0;
    if (!parse_number(row[target], y))
      throw Error(ErrorKind::io, "non-numeric target '" + row[target] + "'");
    if (schema.log_target) {
      if (y <= 0.0) throw Error(ErrorKind::domain, "log transform needs a positive target");
      y = std::log(y);
    }
    result.data.y[i] = y;
  }
  return result;
}

TabularData ingest_csv(const std::string& path, const TabularSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  return ingest_csv(in, schema);
}

}  // namespace ijcomb
