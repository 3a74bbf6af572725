#pragma once

// Batch front end. Exit codes: 0 success, 1 bad input, 2 solver failure or
// dimension blowup (and 1 for a run whose rows did not all pass).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace disent {

enum class Command { measure, protocol, verify, sweep };
enum class VerifyTarget { lemma, thm1, recovery, appendix };

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 1;
inline constexpr int kExitSolver = 2;

struct RunConfig {
  Command command = Command::measure;
  VerifyTarget target = VerifyTarget::thm1;
  std::string state_spec;  // family[:param[,param]] or file:path
  double eps = 0.1;
  double delta = 0.05;
  double tol = 1e-6;
  std::string approx_mode = "both";  // ppt | ensemble | both
  std::uint64_t seed = 0;
  std::string out_path;  // empty writes to the output stream
  std::optional<std::string> format;  // json | csv; per-command default
  int threads = 1;
  std::string grid = "default";
  int M = 2;  // appendix register count

  /// 1 ≥ eps ≥ delta > 0, tol > 0, known enums; throws BadParameter.
  void validate() const;
};

int cmd_measure(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_protocol(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Grid grammar: `family:start:stop:step` sweeps the family parameter,
/// `eps:start:stop:step` sweeps the smoothing parameter on --state.
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Inclusive arithmetic grid; empty when start > stop.
std::vector<double> linspace_step(double start, double stop, double step);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disent
