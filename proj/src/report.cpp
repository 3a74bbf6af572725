#include "disent/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "disent/error.hpp"

namespace disent {

namespace {

using json = nlohmann::ordered_json;

// Round-trips through the 12-digit text so JSON and CSV agree digit for digit.
json real_json(double x) {
  if (!std::isfinite(x)) return format_real(x);
  return std::strtod(format_real(x).c_str(), nullptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return csv_escape(s); }
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(std::int64_t n) const { return std::to_string(n); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

json cell_json(const Cell& c) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(const std::string& s) const { return s; }
    json operator()(double x) const { return real_json(x); }
    json operator()(std::int64_t n) const { return n; }
    json operator()(bool b) const { return b; }
  };
  return std::visit(Visitor{}, c);
}

Cell integer(int n) { return static_cast<std::int64_t>(n); }

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw Error(ErrorCode::BadParameter, "row has " + std::to_string(row.size()) + " cells, table has " +
                                             std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + csv_escape(columns[j]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + cell_text(row[j]);
    out += '\n';
  }
  return out;
}

std::string Table::to_json() const {
  json arr = json::array();
  for (const auto& row : rows) {
    json obj = json::object();
    for (std::size_t j = 0; j < row.size(); ++j) obj[columns[j]] = cell_json(row[j]);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string Table::render(const std::string& format) const {
  if (format == "csv") return to_csv();
  if (format == "json") return to_json();
  throw Error(ErrorCode::BadParameter, "unknown format '" + format + "'");
}

std::string report_to_json(const ProtocolReport& r) {
  json j = json::object();
  j["M"] = r.M;
  j["log2_M"] = real_json(r.log2_M);
  j["eps_target"] = real_json(r.eps_target);
  j["delta"] = real_json(r.delta);
  j["achieved_distance"] = real_json(r.achieved_distance);
  j["approx_mode"] = r.approx_mode;
  j["lower_bound_bits"] = real_json(r.lower_bound_bits);
  j["upper_bound_bits"] = real_json(r.upper_bound_bits);
  j["catalyst_id"] = r.catalyst_id;
  j["pass"] = r.pass;
  j["budget_M"] = r.budget_M;
  return j.dump(2) + "\n";
}

Table theorem_table(const std::vector<TheoremRow>& rows) {
  Table t;
  t.columns = {"state_id",          "eps",         "delta", "M",           "log2_M", "lower_bits", "upper_bits",
               "achieved_distance", "approx_mode", "pass",  "budget_M", "catalyst_id", "error"};
  for (const auto& row : rows) {
    const ProtocolReport& r = row.report;
    if (!row.error.empty()) {
      t.add_row({row.state_id, r.eps_target, r.delta, {}, {}, {}, {}, {}, {}, false, {}, {}, row.error});
      continue;
    }
    t.add_row({row.state_id, r.eps_target, r.delta, integer(r.M), r.log2_M, r.lower_bound_bits, r.upper_bound_bits,
               r.achieved_distance, r.approx_mode, r.pass, integer(r.budget_M), r.catalyst_id, Cell{}});
  }
  return t;
}

Table lemma_table(const std::vector<LemmaRow>& rows) {
  Table t;
  t.columns = {"rho_id", "sigma_id", "zeta", "xi",         "N",        "dmax_bits", "measured_P",
               "bound",  "pass",     "smoothed_P", "monotone", "error"};
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      t.add_row({r.rho_id, r.sigma_id, r.zeta, r.xi, {}, {}, {}, r.bound, false, {}, {}, r.error});
      continue;
    }
    const Cell smoothed = std::isnan(r.smoothed_P) ? Cell{} : Cell{r.smoothed_P};
    t.add_row({r.rho_id, r.sigma_id, r.zeta, r.xi, integer(r.N), r.dmax_bits, r.measured_P, r.bound, r.pass, smoothed,
               r.monotone, Cell{}});
  }
  return t;
}

Table recovery_table(const std::vector<RecoveryRow>& rows) {
  Table t;
  t.columns = {"state_id",   "eps",         "delta",          "M",        "log2_M",       "lower_bits",
               "upper_bits", "achieved_distance", "approx_mode", "pass", "budget_M", "rec_value_bits",
               "cmi_bits",   "petz_distance",     "error"};
  for (const auto& row : rows) {
    const DegradingReport& r = row.report;
    const Cell delta = row.delta > 0 ? Cell{row.delta} : Cell{};  // zero: unsmoothed budget
    if (!row.error.empty()) {
      t.add_row({row.state_id, r.eps_target, delta, {}, {}, {}, {}, {}, {}, false, {}, {}, {}, {}, row.error});
      continue;
    }
    t.add_row({row.state_id, r.eps_target, delta, integer(r.M), r.log2_M, r.dmax_bits,
               std::log2(static_cast<double>(r.budget_M)), r.distance, r.recovery_family, r.pass,
               integer(r.budget_M), r.rec_value_bits, r.cmi_bits, r.petz_distance, Cell{}});
  }
  return t;
}

Table converse_table(const std::vector<ConverseRow>& rows) {
  Table t;
  t.columns = {"state_id", "M", "commutation_residual", "slack", "holds", "error"};
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      t.add_row({r.state_id, integer(r.M), {}, {}, false, r.error});
      continue;
    }
    t.add_row({r.state_id, integer(r.M), r.check.commutation_residual, r.check.slack, r.check.holds, Cell{}});
  }
  return t;
}

}  // namespace disent
