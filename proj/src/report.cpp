#include "ntkx/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace ntkx {
namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

ReportRow& ReportRow::set(std::string name, Cell value) {
  for (auto& [k, v] : fields) {
    if (k == name) {
      v = std::move(value);
      return *this;
    }
  }
  fields.emplace_back(std::move(name), std::move(value));
  return *this;
}

const Cell* ReportRow::find(std::string_view name) const {
  for (const auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

double ReportRow::number(std::string_view name) const {
  const Cell* c = find(name);
  if (!c) return std::numeric_limits<double>::quiet_NaN();
  if (const auto* d = std::get_if<double>(c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(c)) return static_cast<double>(*i);
  return std::numeric_limits<double>::quiet_NaN();
}

std::string ReportRow::text(std::string_view name) const {
  const Cell* c = find(name);
  return c ? format_cell(*c) : std::string();
}

std::vector<std::string> Report::columns() const {
  std::vector<std::string> cols{"scenario", "check", "status"};
  for (const auto& row : rows) {
    for (const auto& [k, v] : row.fields) {
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    }
  }
  return cols;
}

bool Report::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.ok(); });
}

std::vector<const ReportRow*> Report::select(std::string_view check) const {
  std::vector<const ReportRow*> out;
  for (const auto& r : rows) {
    if (r.check == check) out.push_back(&r);
  }
  return out;
}

std::string format_cell(const Cell& c) {
  struct Fmt {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double d) const {
      if (std::isnan(d)) return "nan";
      if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      return buf;
    }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Fmt{}, c);
}

void write_csv(std::ostream& os, const Report& report) {
  const auto cols = report.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j];
  os << '\n';
  for (const auto& row : report.rows) {
    os << quote_if_needed(row.scenario) << ',' << quote_if_needed(row.check) << ','
       << quote_if_needed(row.status);
    for (std::size_t j = 3; j < cols.size(); ++j) {
      const Cell* c = row.find(cols[j]);
      os << ',' << (c ? quote_if_needed(format_cell(*c)) : std::string());
    }
    os << '\n';
  }
}

std::string to_csv(const Report& report) {
  std::ostringstream os;
  write_csv(os, report);
  return os.str();
}

}  // namespace ntkx
