#pragma once

// Check rows and CSV emission. Floats are written with shortest
// round-trip formatting (std::to_chars), '.' decimal separator, '\n' line
// ends: identical inputs give byte-identical files.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cfk/types.hpp"

namespace cfk {

std::string format_double(double x);

using CsvCell = std::variant<std::string, double, std::int64_t, std::uint64_t, bool>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<CsvCell> cells);
  std::string to_string() const;
  void write(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

struct CheckRow {
  std::string check_id;
  std::string scenario_id;
  double value = 0.0;      // measured deviation / statistic
  double tolerance = 0.0;  // bound it must satisfy
  bool pass = false;
  std::string note;
};

struct RunReport {
  std::vector<CheckRow> rows;

  void add(CheckRow row) { rows.push_back(std::move(row)); }
  bool all_pass() const;
  CsvTable to_csv() const;
};

}  // namespace cfk
