#pragma once

// Deterministic report tables. Every real is printed with 12 significant
// digits so identical runs give byte-identical CSV and JSON.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "disent/convexsplit.hpp"
#include "disent/protocol.hpp"
#include "disent/recovery.hpp"

namespace disent {

/// %.12g; non-finite values print as inf, -inf, nan.
std::string format_real(double x);

/// Empty cells (std::monostate) print as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);  // throws BadParameter on width mismatch
  std::string to_csv() const;
  /// Array of objects keyed by column name.
  std::string to_json() const;
  std::string render(const std::string& format) const;  // "csv" or "json"
};

/// Object with the field names of ProtocolReport.
std::string report_to_json(const ProtocolReport& r);

/// state_id, eps, delta, M, log2_M, lower_bits, upper_bits,
/// achieved_distance, approx_mode, pass (then budget_M, catalyst_id, error).
Table theorem_table(const std::vector<TheoremRow>& rows);

/// rho_id, sigma_id, zeta, xi, N, dmax_bits, measured_P, bound, pass
/// (then smoothed_P, monotone, error).
Table lemma_table(const std::vector<LemmaRow>& rows);

struct RecoveryRow {
  std::string state_id;
  double delta = 0;
  DegradingReport report;
  std::string error;
};
/// The theorem columns (lower_bits = D_max against the Petz-recovered state,
/// upper_bits = log2 of the budget, approx_mode = recovery family) plus
/// rec_value_bits, cmi_bits, petz_distance.
Table recovery_table(const std::vector<RecoveryRow>& rows);

struct ConverseRow {
  std::string state_id;
  int M = 2;
  ConverseCheck check;
  std::string error;
};
Table converse_table(const std::vector<ConverseRow>& rows);

}  // namespace disent
