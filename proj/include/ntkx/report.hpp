#pragma once

// Flat report rows and their CSV form. Every float is written with 17
// significant digits so that reruns can be compared byte for byte.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ntkx {

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct ReportRow {
  std::string scenario;
  std::string check;
  std::string status = "ok";
  std::vector<std::pair<std::string, Cell>> fields;

  ReportRow& set(std::string name, Cell value);
  const Cell* find(std::string_view name) const;
  /// The named numeric field; NaN when absent or not numeric.
  double number(std::string_view name) const;
  std::string text(std::string_view name) const;
  /// "ok" and "skipped" rows count as successful cells; "error" rows do not.
  bool ok() const { return status != "error"; }
};

struct Report {
  std::string subcommand;
  std::vector<ReportRow> rows;

  /// scenario, check, status, then every field name in first-seen order.
  std::vector<std::string> columns() const;
  bool all_ok() const;
  /// Rows whose check column equals `check`.
  std::vector<const ReportRow*> select(std::string_view check) const;
};

std::string format_cell(const Cell& c);
void write_csv(std::ostream& os, const Report& report);
std::string to_csv(const Report& report);

}  // namespace ntkx
