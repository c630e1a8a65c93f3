/// @file report.hpp
/// @brief Check rows and their text and JSON-lines renderings.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nonpure::cli {

struct Row {
  std::string check;
  double residual = 0.0;
  /// Absent for informational rows, which always pass.
  std::optional<double> tol;
  /// Fitted order; present only with three or more levels.
  std::optional<double> order;
  bool at_floor = false;
  std::optional<double> min_order;
  bool pass = true;
  std::string note;
};

struct Report {
  std::string command;
  std::uint64_t scenario_hash = 0;
  int levels = 1;
  /// Finest resolution used; zero when not applicable.
  double h = 0.0;
  double du = 0.0;
  std::vector<Row> rows;

  bool pass() const;
};

/// Sets `pass` from residual, tolerance and order requirements.
void judge(Row& row);

std::string hash_hex(std::uint64_t h);

/// Aligned table followed by an overall line.
std::string to_text(const Report& r);

/// One record per row with fields check, residual, tol, order, pass (plus
/// at_floor and note when relevant), then a summary record.
std::string to_jsonl(const Report& r);

}  // namespace nonpure::cli
