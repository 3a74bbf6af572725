#include "disent/cli.hpp"

#include <cmath>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "disent/convexsplit.hpp"
#include "disent/error.hpp"
#include "disent/parallel.hpp"
#include "disent/protocol.hpp"
#include "disent/recovery.hpp"
#include "disent/report.hpp"
#include "disent/separability.hpp"
#include "disent/state_io.hpp"
#include "disent/states.hpp"

namespace disent {

namespace {

bool solver_side(ErrorCode code) { return code == ErrorCode::SolverFailure || code == ErrorCode::DimensionBlowup; }

bool solver_side(const std::string& message) {
  return message.rfind(std::string(to_string(ErrorCode::SolverFailure)), 0) == 0 ||
         message.rfind(std::string(to_string(ErrorCode::DimensionBlowup)), 0) == 0;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return solver_side(e.code()) ? kExitSolver : kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty())
    out << text;
  else
    write_file_atomic(cfg.out_path, text);
}

std::string format_for(const RunConfig& cfg, const char* fallback) { return cfg.format.value_or(fallback); }

// First label against the rest.
Partition default_partition(const DensityOperator& rho) {
  const Labels& labels = rho.dims().labels();
  if (labels.size() < 2) throw Error(ErrorCode::BadPartition, "state needs at least two parties");
  return Partition::split({labels.front()}, Labels(labels.begin() + 1, labels.end()));
}

std::vector<ApproxMode> modes_of(const std::string& approx) {
  if (approx == "both") return {ApproxMode::ppt, ApproxMode::ensemble};
  return {parse_approx_mode(approx)};
}

struct Measures {
  double h = 0;
  double h_a = 0;
  double mutual_info = 0;
  std::optional<SepDivergence> ree_ppt;
  std::optional<SepDivergence> ree_ensemble;
  double e_max_smooth = 0;
  double d_max_bits = 0;
  double smooth_d_max_bits = 0;
};

Measures measure_state(const DensityOperator& rho, double eps, double tol, const std::string& approx) {
  const Partition part = default_partition(rho);
  Measures m;
  m.h = von_neumann_entropy(rho);
  m.h_a = marginal_entropy(rho, part.groups[0]);
  m.mutual_info = mutual_information(rho, part.groups[0], part.groups[1]);
  for (ApproxMode mode : modes_of(approx)) {
    SepDivergence v = ree(rho, part, mode, tol);
    (mode == ApproxMode::ppt ? m.ree_ppt : m.ree_ensemble) = std::move(v);
  }
  m.e_max_smooth = e_max_smooth(rho, part, eps, ApproxMode::ppt).bits;
  // The max-divergence family is taken against the relative-entropy optimizer.
  const SepDivergence& best = m.ree_ppt ? *m.ree_ppt : *m.ree_ensemble;
  if (best.certificate) {
    m.d_max_bits = d_max(rho, *best.certificate).bits;
    m.smooth_d_max_bits = smooth_d_max(rho, *best.certificate, eps).bits;
  } else {
    m.d_max_bits = m.smooth_d_max_bits = kInfinity;
  }
  return m;
}

Cell optional_bits(const std::optional<SepDivergence>& v) { return v ? Cell{v->bits} : Cell{}; }
Cell optional_status(const std::optional<SepDivergence>& v) {
  return v ? Cell{std::string(to_string(v->status))} : Cell{};
}

struct SweepPoint {
  std::string state_spec;
  double param = 0;
  double eps = 0;
};

std::vector<std::string> split_grid(const std::string& grid) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = grid.find(':', start);
    parts.push_back(grid.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  return parts;
}

double grid_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::BadParameter, "grid value '" + text + "' is not a number");
  return v;
}

std::vector<SweepPoint> sweep_points(const RunConfig& cfg) {
  const std::string grid = cfg.grid == "default" ? "werner:0:1:0.05" : cfg.grid;
  const auto parts = split_grid(grid);
  if (parts.size() != 4) throw Error(ErrorCode::BadParameter, "grid must read name:start:stop:step, got '" + grid + "'");
  const double step = grid_number(parts[3]);
  if (!(step > 0)) throw Error(ErrorCode::BadParameter, "grid step must be positive");
  const auto values = linspace_step(grid_number(parts[1]), grid_number(parts[2]), step);
  if (values.empty()) throw Error(ErrorCode::BadParameter, "grid '" + grid + "' is empty");
  std::vector<SweepPoint> points;
  for (double v : values) {
    if (parts[0] == "eps") {
      if (cfg.state_spec.empty()) throw Error(ErrorCode::BadParameter, "an eps sweep needs --state");
      points.push_back({cfg.state_spec, v, v});
    } else {
      points.push_back({parts[0] + ":" + format_real(v), v, cfg.eps});
    }
  }
  return points;
}

const std::vector<std::string>& default_recovery_states() {
  static const std::vector<std::string> states = {"ghz3", "markov:0", "markov:1"};
  return states;
}

std::vector<std::string> default_appendix_states() {
  std::vector<std::string> states = {"ghz3"};
  for (int s = 0; s < 10; ++s) states.push_back("random3:" + std::to_string(s));
  return states;
}

std::vector<std::string> states_or_default(const RunConfig& cfg, const std::vector<std::string>& fallback) {
  if (!cfg.state_spec.empty()) return {cfg.state_spec};
  if (cfg.grid != "default") throw Error(ErrorCode::BadParameter, "unknown grid '" + cfg.grid + "'");
  return fallback;
}

struct Tripartite {
  Labels a, b, c;
};
Tripartite tripartite(const DensityOperator& rho) {
  const Labels& l = rho.dims().labels();
  if (l.size() != 3) throw Error(ErrorCode::BadPartition, "recovery needs a three-party state");
  return {{l[0]}, {l[1]}, {l[2]}};
}

int verify_lemma_cmd(const RunConfig& cfg, std::ostream& out) {
  if (cfg.grid != "default") throw Error(ErrorCode::BadParameter, "unknown lemma grid '" + cfg.grid + "'");
  const auto rows = verify_lemma(default_lemma_grid(cfg.seed), cfg.threads);
  emit(cfg, lemma_table(rows).render(format_for(cfg, "csv")), out);
  // Bound violations are reported in the table; only solver failures fail the run.
  for (const auto& r : rows)
    if (solver_side(r.error)) return kExitSolver;
  return kExitOk;
}

int verify_thm1_cmd(const RunConfig& cfg, std::ostream& out) {
  std::vector<TheoremCase> grid;
  if (!cfg.state_spec.empty()) {
    const DensityOperator rho = parse_state_spec(cfg.state_spec);
    grid.push_back({cfg.state_spec, rho, default_partition(rho), cfg.eps, cfg.delta});
  } else if (cfg.grid == "default") {
    grid = default_theorem_grid();
  } else {
    throw Error(ErrorCode::BadParameter, "unknown theorem grid '" + cfg.grid + "'");
  }
  const auto rows = verify_theorem(grid, cfg.threads);
  emit(cfg, theorem_table(rows).render(format_for(cfg, "csv")), out);
  bool all = true;
  for (const auto& r : rows) {
    if (solver_side(r.error)) return kExitSolver;
    all = all && r.error.empty() && r.report.pass;
  }
  return all ? kExitOk : kExitBadInput;
}

int verify_recovery_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto states = states_or_default(cfg, default_recovery_states());
  std::vector<RecoveryRow> rows(states.size());
  parallel_for(static_cast<int>(states.size()), cfg.threads, [&](int i) {
    RecoveryRow& row = rows[i];
    row.state_id = states[i];
    row.report.eps_target = cfg.eps;
    try {
      const DensityOperator rho = parse_state_spec(states[i]);
      const auto [a, b, c] = tripartite(rho);
      const DensityOperator target = recovered_state(rho, petz_map(rho, c, a), c);
      const int budget = registers_for(rho, target, 0, cfg.eps).N;
      row.report = simulate_recovery_degrading(rho, a, b, c, budget, cfg.eps);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  emit(cfg, recovery_table(rows).render(format_for(cfg, "csv")), out);
  bool all = true;
  for (const auto& r : rows) {
    if (solver_side(r.error)) return kExitSolver;
    all = all && r.error.empty() && r.report.pass;
  }
  return all ? kExitOk : kExitBadInput;
}

int verify_appendix_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto states = states_or_default(cfg, default_appendix_states());
  std::vector<ConverseRow> rows(states.size());
  parallel_for(static_cast<int>(states.size()), cfg.threads, [&](int i) {
    ConverseRow& row = rows[i];
    row.state_id = states[i];
    row.M = cfg.M;
    try {
      const DensityOperator rho = parse_state_spec(states[i]);
      const auto [a, b, c] = tripartite(rho);
      row.check = appendix_converse_check(rho, a, b, c, cfg.M);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  emit(cfg, converse_table(rows).render(format_for(cfg, "csv")), out);
  bool all = true;
  for (const auto& r : rows) {
    if (solver_side(r.error)) return kExitSolver;
    all = all && r.error.empty() && r.check.holds;
  }
  return all ? kExitOk : kExitBadInput;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--state", cfg.state_spec, "family[:param[,param]] or file:path");
  sub->add_option("--eps", cfg.eps, "target distance / smoothing parameter")->capture_default_str();
  sub->add_option("--delta", cfg.delta, "slack below eps spent on the budget")->capture_default_str();
  sub->add_option("--tol", cfg.tol, "solver tolerance")->capture_default_str();
  sub->add_option("--approx", cfg.approx_mode, "ppt | ensemble | both")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "seed for generated grids")->capture_default_str();
  sub->add_option("--out", cfg.out_path, "write the report here instead of stdout");
  sub->add_option("--format", cfg.format, "json | csv");
  sub->add_option("--threads", cfg.threads, "worker count for row fan-out")->capture_default_str();
  sub->add_option("--grid", cfg.grid, "default, or name:start:stop:step for sweep")->capture_default_str();
}

constexpr const char* kFamilies =
    "State families: bell, werner:p[,d], isotropic:f[,d], ghz:k, ghz3, maxcorr:M, mixed:dA,dB,\n"
    "random:seed[,dA,dB[,rank]], random3:seed[,rank], markov:seed, file:path.json";

}  // namespace

void RunConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::BadParameter, what); };
  if (!(eps > 0 && eps <= 1)) bad("--eps must lie in (0, 1]");
  if (!(tol > 0)) bad("--tol must be positive");
  if (threads < 1) bad("--threads must be at least 1");
  if (approx_mode != "ppt" && approx_mode != "ensemble" && approx_mode != "both") bad("--approx must be ppt, ensemble or both");
  if (format && *format != "json" && *format != "csv") bad("--format must be json or csv");
  if (command == Command::protocol || (command == Command::verify && target == VerifyTarget::thm1)) {
    if (!(delta > 0 && delta <= eps)) bad("--delta must lie in (0, eps]");
  }
  if (command == Command::verify && target == VerifyTarget::appendix && M < 1) bad("--M must be at least 1");
}

std::vector<double> linspace_step(double start, double stop, double step) {
  std::vector<double> out;
  if (!(step > 0) || start > stop) return out;
  const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long i = 0; i < n; ++i) out.push_back(std::strtod(format_real(start + i * step).c_str(), nullptr));
  return out;
}

int cmd_measure(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    if (cfg.state_spec.empty()) throw Error(ErrorCode::BadParameter, "measure needs --state");
    const DensityOperator rho = parse_state_spec(cfg.state_spec);
    const Measures m = measure_state(rho, cfg.eps, cfg.tol, cfg.approx_mode);
    Table t;
    t.columns = {"state_id",     "H",              "H_A",         "mutual_info",  "ree_ppt",
                 "ree_ppt_status", "ree_ensemble", "ree_ensemble_status", "eps", "e_max_smooth",
                 "d_max_bits",   "smooth_d_max_bits"};
    t.add_row({cfg.state_spec, m.h, m.h_a, m.mutual_info, optional_bits(m.ree_ppt), optional_status(m.ree_ppt),
               optional_bits(m.ree_ensemble), optional_status(m.ree_ensemble), cfg.eps, m.e_max_smooth, m.d_max_bits,
               m.smooth_d_max_bits});
    emit(cfg, t.render(format_for(cfg, "json")), out);
    return kExitOk;
  });
}

int cmd_protocol(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    if (cfg.state_spec.empty()) throw Error(ErrorCode::BadParameter, "protocol needs --state");
    const DensityOperator rho = parse_state_spec(cfg.state_spec);
    const Partition part = default_partition(rho);
    std::vector<SeparableCatalyst> candidates;
    ProtocolOptions options;
    if (cfg.approx_mode != "ensemble") candidates = default_candidates(rho, part);
    if (cfg.approx_mode != "ppt") {
      const SepDivergence r = ree(rho, part, ApproxMode::ensemble, cfg.tol);
      if (r.ensemble) candidates.push_back(catalyst_from_ensemble("ree-ensemble", *r.ensemble));
      // Keep the product-ensemble certificate instead of re-certifying by PPT.
      if (cfg.approx_mode == "ensemble") options.refine = false;
    }
    if (candidates.empty()) throw Error(ErrorCode::SolverFailure, "no separable catalyst available");
    const ProtocolReport r = one_shot_cost_search(rho, part, cfg.eps, cfg.delta, candidates, options);
    if (format_for(cfg, "json") == "json") {
      emit(cfg, report_to_json(r), out);
    } else {
      emit(cfg, theorem_table({{cfg.state_spec, r, ""}}).to_csv(), out);
    }
    return r.pass ? kExitOk : kExitBadInput;
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    switch (cfg.target) {
      case VerifyTarget::lemma:
        return verify_lemma_cmd(cfg, out);
      case VerifyTarget::thm1:
        return verify_thm1_cmd(cfg, out);
      case VerifyTarget::recovery:
        return verify_recovery_cmd(cfg, out);
      case VerifyTarget::appendix:
        return verify_appendix_cmd(cfg, out);
    }
    return kExitBadInput;
  });
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const auto points = sweep_points(cfg);
    std::vector<std::optional<Measures>> results(points.size());
    std::vector<std::string> errors(points.size());
    // Rows write only their own slot, so output order is independent of timing.
    parallel_for(static_cast<int>(points.size()), cfg.threads, [&](int i) {
      try {
        results[i] = measure_state(parse_state_spec(points[i].state_spec), points[i].eps, cfg.tol, cfg.approx_mode);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
    Table t;
    t.columns = {"point", "param", "state_id", "eps", "H", "mutual_info", "ree_ppt", "ree_ensemble",
                 "e_max_smooth", "status", "error"};
    bool failed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const SweepPoint& p = points[i];
      const Cell index = static_cast<std::int64_t>(i);
      if (!results[i]) {
        failed = true;
        t.add_row({index, p.param, p.state_spec, p.eps, {}, {}, {}, {}, {}, std::string("error"), errors[i]});
        continue;
      }
      const Measures& m = *results[i];
      t.add_row({index, p.param, p.state_spec, p.eps, m.h, m.mutual_info, optional_bits(m.ree_ppt),
                 optional_bits(m.ree_ensemble), m.e_max_smooth, std::string("ok"), Cell{}});
    }
    emit(cfg, t.render(format_for(cfg, "csv")), out);
    return failed ? kExitSolver : kExitOk;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.threads = default_threads();
  CLI::App app("Catalytic disentangling and recovery toolkit", "disent");
  app.footer(kFamilies);
  app.require_subcommand(1);

  auto* measure = app.add_subcommand("measure", "entropies, relative entropy of entanglement and max-divergences");
  auto* protocol = app.add_subcommand("protocol", "smallest certified register count for --state");
  auto* verify = app.add_subcommand("verify", "verification tables: lemma | thm1 | recovery | appendix");
  auto* sweep = app.add_subcommand("sweep", "measures over a parameter grid");
  for (auto* sub : {measure, protocol, verify, sweep}) add_common(sub, cfg);

  std::string target = "thm1";
  verify->add_option("target", target, "lemma | thm1 | recovery | appendix")
      ->check(CLI::IsMember({"lemma", "thm1", "recovery", "appendix"}))
      ->required();
  verify->add_option("--M", cfg.M, "register count for the appendix check")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  if (*measure) return cmd_measure(cfg, out, err);
  if (*protocol) {
    cfg.command = Command::protocol;
    return cmd_protocol(cfg, out, err);
  }
  if (*verify) {
    cfg.command = Command::verify;
    cfg.target = target == "lemma"      ? VerifyTarget::lemma
                 : target == "recovery" ? VerifyTarget::recovery
                 : target == "appendix" ? VerifyTarget::appendix
                                        : VerifyTarget::thm1;
    return cmd_verify(cfg, out, err);
  }
  cfg.command = Command::sweep;
  return cmd_sweep(cfg, out, err);
}

}  // namespace disent
