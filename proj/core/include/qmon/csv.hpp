#pragma once

#include <string>
#include <vector>

namespace qmon {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of `name` in columns; throws Error when absent.
  std::size_t column(const std::string& name) const;
};

/// Shortest round-trip formatting with at most 17 significant digits.
std::string format_double(double v);

/// Header then one row per entry; '\n' line endings. Throws Error when the
/// file cannot be written or a row has the wrong width.
void write_csv(const Table& table, const std::string& path);
std::string to_csv(const Table& table);

Table read_csv(const std::string& path);
Table parse_csv(const std::string& text);

}  // namespace qmon
