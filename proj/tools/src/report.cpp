#include "nonpure_cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "nonpure/io.hpp"

namespace nonpure::cli {

namespace {

using Json = nlohmann::ordered_json;

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string cell(const std::optional<double>& x) { return x ? format_double(*x) : "-"; }

}  // namespace

bool Report::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });
}

void judge(Row& row) {
  bool ok = true;
  if (row.tol) ok = row.residual <= *row.tol;
  if (row.min_order && row.order && !row.at_floor) ok = ok && *row.order >= *row.min_order;
  row.pass = ok && !std::isnan(row.residual);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_text(const Report& r) {
  std::vector<std::vector<std::string>> table{{"check", "residual", "tol", "order", "pass"}};
  for (const Row& row : r.rows) {
    std::string order = row.at_floor ? "floor" : cell(row.order);
    table.push_back({row.check, format_double(row.residual), cell(row.tol), order,
                     row.pass ? "yes" : "NO"});
  }
  std::vector<std::size_t> width(5, 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  os << r.command << "  scenario " << hash_hex(r.scenario_hash) << "  levels " << r.levels;
  if (r.h > 0.0) os << "  h " << format_double(r.h);
  if (r.du > 0.0) os << "  du " << format_double(r.du);
  os << '\n';
  for (const auto& line : table) {
    for (std::size_t c = 0; c < 5; ++c) {
      os << line[c];
      if (c + 1 < 5) os << std::string(width[c] - line[c].size() + 2, ' ');
    }
    os << '\n';
  }
  for (const Row& row : r.rows) {
    if (!row.note.empty()) os << "note " << row.check << ": " << row.note << '\n';
  }
  os << "overall " << (r.pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string to_jsonl(const Report& r) {
  std::ostringstream os;
  for (const Row& row : r.rows) {
    Json j;
    j["check"] = row.check;
    j["residual"] = number_or_null(row.residual);
    j["tol"] = row.tol ? number_or_null(*row.tol) : Json(nullptr);
    j["order"] = row.order && !row.at_floor ? number_or_null(*row.order) : Json(nullptr);
    j["pass"] = row.pass;
    if (row.at_floor) j["at_floor"] = true;
    if (!row.note.empty()) j["note"] = row.note;
    os << j.dump() << '\n';
  }
  Json summary;
  summary["summary"] = r.command;
  summary["pass"] = r.pass();
  summary["scenario_hash"] = hash_hex(r.scenario_hash);
  summary["levels"] = r.levels;
  summary["h"] = r.h;
  summary["du"] = r.du;
  os << summary.dump() << '\n';
  return os.str();
}

}  // namespace nonpure::cli
