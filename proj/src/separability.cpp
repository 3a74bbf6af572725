#include "disent/separability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

#include "json.hpp"

#include "disent/relent_program.hpp"
#include "disent/sdp.hpp"
#include "disent/states.hpp"

namespace disent {

namespace {

constexpr double kLn2 = std::numbers::ln2;

Labels flatten(const Partition& p) {
  Labels out;
  for (const auto& g : p.groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::vector<int> group_dims(const Partition& p, const SubsystemDims& dims) {
  std::vector<int> out;
  for (const auto& g : p.groups) out.push_back(dims.dim_of(g));
  return out;
}

ComplexVector kron_vectors(const std::vector<ComplexVector>& factors) {
  ComplexVector v = ComplexVector::Ones(1);
  for (const auto& f : factors) {
    ComplexVector next(v.size() * f.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) next.segment(i * f.size(), f.size()) = v(i) * f;
    v = std::move(next);
  }
  return v;
}

/// |ψ⟩⟨ψ| for grouped factors, returned in the original label order.
ComplexMatrix product_projector(const std::vector<ComplexVector>& factors, const SubsystemDims& dims,
                                const Partition& p) {
  const ComplexVector v = kron_vectors(factors);
  const ComplexMatrix proj = v * v.adjoint();
  const Labels order = flatten(p);
  if (order == dims.labels()) return proj;
  return permute(proj, dims.reorder(order), dims.labels());
}

struct Atom {
  std::vector<ComplexVector> states;
  ComplexMatrix projector;
};

std::vector<Atom> computational_atoms(const SubsystemDims& dims, const Partition& p) {
  const auto gd = group_dims(p, dims);
  std::vector<Atom> atoms;
  std::vector<int> digit(gd.size(), 0);
  while (true) {
    Atom a;
    for (std::size_t g = 0; g < gd.size(); ++g) {
      ComplexVector e = ComplexVector::Zero(gd[g]);
      e(digit[g]) = 1.0;
      a.states.push_back(e);
    }
    a.projector = product_projector(a.states, dims, p);
    atoms.push_back(std::move(a));
    std::size_t k = gd.size();
    while (k > 0) {
      --k;
      if (++digit[k] < gd[k]) break;
      digit[k] = 0;
      if (k == 0) return atoms;
    }
    if (gd.empty()) return atoms;
  }
}

ProductEnsemble make_ensemble(const SubsystemDims& dims, const Partition& p, const std::vector<Atom>& atoms,
                              const std::vector<double>& weights) {
  ProductEnsemble ens{dims, p, {}};
  double total = 0;
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (weights[j] > 1e-12) total += weights[j];
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (weights[j] > 1e-12) ens.points.push_back({weights[j] / total, atoms[j].states});
  return ens;
}

/// Orthonormal basis of the sum-zero subspace of Rⁿ (Helmert vectors).
std::vector<Eigen::VectorXd> sum_zero_basis(int n) {
  std::vector<Eigen::VectorXd> out;
  for (int k = 1; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e.head(k).setConstant(1.0);
    e(k) = -static_cast<double>(k);
    out.push_back(e / std::sqrt(static_cast<double>(k) * (k + 1)));
  }
  return out;
}

/// σ(x) = I/d + Σ x_a B_a over the traceless Hermitian basis, constrained by
/// σ ⪰ 0 and σ^Γ ⪰ 0 on every cut.
struct PptParametrization {
  std::vector<ComplexMatrix> basis;
  AffineHermitian sigma;
  std::vector<AffineHermitian> constraints;
};

PptParametrization ppt_parametrization(const SubsystemDims& dims, const std::vector<Labels>& cuts) {
  const int d = dims.total();
  PptParametrization out;
  out.basis = sdp::hermitian_basis(d, true);
  out.sigma.constant = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  out.sigma.coeffs = out.basis;
  out.constraints.push_back(out.sigma);
  for (const auto& cut : cuts) {
    AffineHermitian k;
    k.constant = out.sigma.constant;
    for (const auto& b : out.basis) k.coeffs.push_back(partial_transpose(b, dims, cut));
    out.constraints.push_back(std::move(k));
  }
  return out;
}

void add_ppt_blocks(sdp::Problem& p, const sdp::HermitianVar& s, const SubsystemDims& dims,
                    const std::vector<Labels>& cuts, const ComplexMatrix& constant) {
  const int d = dims.total();
  const int pos = p.add_block(d);
  if (constant.size() > 0) p.add_constant(pos, constant);
  p.add_term(pos, s);
  for (const auto& cut : cuts) {
    const int blk = p.add_block(d);
    if (constant.size() > 0) p.add_constant(blk, partial_transpose(constant, dims, cut));
    p.add_term(blk, s, 1.0, [&](const ComplexMatrix& m) { return partial_transpose(m, dims, cut); });
  }
}

bool solution_usable(const sdp::Solution& sol) {
  return sol.ok() || (sol.gap <= 1e-6 * std::max(1.0, std::abs(sol.primal_objective)) &&
                      sol.primal_infeasibility <= 1e-6);
}

/// Fidelity ball around ρ: [[ρ_s, X],[X†, W† ρ̄ W]] ⪰ 0 with ρ compressed to
/// its support W; returns the block index and the coupling variable.
struct Ball {
  ComplexMatrix w;
  ComplexMatrix rho_s;
  sdp::ComplexVar x;
  int block = -1;
};

Ball add_ball(sdp::Problem& p, const DensityOperator& rho) {
  Ball b;
  b.w = support_isometry(rho.matrix());
  b.rho_s = hermitian_part(b.w.adjoint() * rho.matrix() * b.w);
  const int r = static_cast<int>(b.w.cols());
  b.x = p.add_complex(r, r);
  b.block = p.add_block(2 * r);
  p.add_constant(b.block, b.rho_s);
  p.add_term(b.block, b.x, 1.0, 0, r);
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// partitions and ensembles

Partition Partition::singletons(const SubsystemDims& dims) {
  Partition p;
  for (const auto& l : dims.labels()) p.groups.push_back({l});
  return p;
}

void Partition::validate(const SubsystemDims& dims) const {
  if (groups.size() < 2) throw Error(ErrorCode::BadPartition, "a partition needs at least two parts");
  std::set<std::string> seen;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::BadPartition, "empty part");
    for (const auto& l : g) {
      if (!dims.contains(l)) throw Error(ErrorCode::BadPartition, "unknown label '" + l + "'");
      if (!seen.insert(l).second) throw Error(ErrorCode::BadPartition, "label '" + l + "' appears twice");
    }
  }
  if (seen.size() != dims.size()) throw Error(ErrorCode::BadPartition, "parts do not cover every party");
}

std::string_view to_string(ApproxMode mode) { return mode == ApproxMode::ppt ? "ppt" : "ensemble"; }

ApproxMode parse_approx_mode(const std::string& text) {
  if (text == "ppt") return ApproxMode::ppt;
  if (text == "ensemble") return ApproxMode::ensemble;
  throw Error(ErrorCode::BadParameter, "unknown approximation mode '" + text + "'");
}

std::vector<Labels> ppt_cuts(const Partition& partition) {
  const int k = static_cast<int>(partition.groups.size());
  const int half = (k + 1) / 2;
  std::vector<Labels> cuts;
  std::set<std::vector<int>> seen;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    if (std::popcount(mask) != half) continue;
    std::vector<int> in, out;
    for (int g = 0; g < k; ++g) ((mask >> g) & 1u ? in : out).push_back(g);
    if (seen.count(out)) continue;
    seen.insert(in);
    Labels labels;
    for (int g : in) labels.insert(labels.end(), partition.groups[g].begin(), partition.groups[g].end());
    cuts.push_back(std::move(labels));
  }
  return cuts;
}

SepApprox make_approx(ApproxMode mode, const Partition& partition) {
  SepApprox a;
  a.mode = mode;
  if (mode == ApproxMode::ppt) a.cut_set = ppt_cuts(partition);
  return a;
}

void ProductEnsemble::validate() const {
  partition.validate(dims);
  if (points.empty()) throw Error(ErrorCode::InvalidState, "empty product ensemble");
  const auto gd = group_dims(partition, dims);
  double total = 0;
  for (const auto& pt : points) {
    if (!(pt.weight > 0)) throw Error(ErrorCode::InvalidState, "ensemble weights must be positive");
    total += pt.weight;
    if (pt.states.size() != gd.size()) throw Error(ErrorCode::DimMismatch, "one local state per part expected");
    for (std::size_t g = 0; g < gd.size(); ++g) {
      if (pt.states[g].size() != gd[g]) throw Error(ErrorCode::DimMismatch, "local state has the wrong dimension");
      if (std::abs(pt.states[g].norm() - 1.0) > kTolNorm) throw Error(ErrorCode::InvalidState, "local state not normalized");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidState, "ensemble weights sum to " + std::to_string(total));
}

DensityOperator realize(const ProductEnsemble& ens) {
  ens.validate();
  const int d = ens.dims.total();
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (const auto& pt : ens.points) m += pt.weight * product_projector(pt.states, ens.dims, ens.partition);
  return DensityOperator::repaired(hermitian_part(m), ens.dims);
}

std::string ensemble_to_json(const ProductEnsemble& ens) {
  using nlohmann::json;
  json doc;
  doc["dims"] = json::array();
  for (const auto& p : ens.dims.parties()) doc["dims"].push_back({{"label", p.label}, {"dim", p.dim}});
  doc["parties"] = json::array();
  for (const auto& g : ens.partition.groups) doc["parties"].push_back(g);
  doc["points"] = json::array();
  for (const auto& pt : ens.points) {
    json states = json::array();
    for (const auto& v : pt.states) {
      json amps = json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) amps.push_back({v(i).real(), v(i).imag()});
      states.push_back(amps);
    }
    doc["points"].push_back({{"weight", pt.weight}, {"states", states}});
  }
  return doc.dump(2);
}

ProductEnsemble ensemble_from_json(const std::string& text) {
  using nlohmann::json;
  auto fail = [](const std::string& m) -> void { throw Error(ErrorCode::InvalidFile, m); };
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidFile, std::string("syntax error: ") + e.what());
  }
  ProductEnsemble ens;
  try {
    std::vector<Party> parties;
    for (const auto& p : doc.at("dims")) parties.push_back({p.at("label").get<std::string>(), p.at("dim").get<int>()});
    ens.dims = SubsystemDims(std::move(parties));
    for (const auto& g : doc.at("parties")) ens.partition.groups.push_back(g.get<Labels>());
    for (const auto& pt : doc.at("points")) {
      ProductPoint point;
      point.weight = pt.at("weight").get<double>();
      for (const auto& amps : pt.at("states")) {
        ComplexVector v(static_cast<Eigen::Index>(amps.size()));
        for (std::size_t i = 0; i < amps.size(); ++i) v(i) = cplx(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
        point.states.push_back(v);
      }
      ens.points.push_back(std::move(point));
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed ensemble: ") + e.what());
  }
  ens.validate();
  return ens;
}

PptCheck is_ppt(const DensityOperator& s, const Partition& partition) {
  partition.validate(s.dims());
  PptCheck out{true, min_eigenvalue(s.matrix())};
  for (const auto& cut : ppt_cuts(partition))
    out.min_eigenvalue = std::min(out.min_eigenvalue, min_eigenvalue(partial_transpose(s.matrix(), s.dims(), cut)));
  out.ppt = out.min_eigenvalue >= -kTolPsd;
  return out;
}

// ---------------------------------------------------------------------------
// product-state oracle

ProductOptimum best_product_state(const ComplexMatrix& h, const SubsystemDims& dims, const Partition& partition,
                                  std::uint64_t seed, int restarts) {
  partition.validate(dims);
  const Labels order = flatten(partition);
  const ComplexMatrix hp = hermitian_part(order == dims.labels() ? h : permute(h, dims, order));
  const auto gd = group_dims(partition, dims);
  const std::size_t k = gd.size();
  Rng rng(seed);

  auto local_operator = [&](const std::vector<ComplexVector>& f, std::size_t p) {
    ComplexMatrix b = ComplexMatrix::Ones(1, 1);
    for (std::size_t q = 0; q < k; ++q) {
      const ComplexMatrix factor = q == p ? ComplexMatrix::Identity(gd[q], gd[q]) : ComplexMatrix(f[q]);
      b = kron(b, factor);
    }
    return ComplexMatrix(b.adjoint() * hp * b);
  };

  ProductOptimum best;
  best.value = -kInfinity;
  for (int r = 0; r < restarts; ++r) {
    std::vector<ComplexVector> f;
    for (std::size_t g = 0; g < k; ++g) f.push_back(random_unit_vector(rng, gd[g]));
    double value = -kInfinity;
    for (int sweep = 0; sweep < 500; ++sweep) {
      double next = value;
      for (std::size_t p = 0; p < k; ++p) {
        const auto eig = hermitian_eig(hermitian_part(local_operator(f, p)));
        f[p] = eig.vectors.col(0);
        next = eig.values(0);
      }
      const double gain = next - value;
      value = next;
      if (gain < 1e-12) break;
    }
    if (value > best.value) {
      best.value = value;
      best.states = f;
    }
  }
  best.projector = product_projector(best.states, dims, partition);
  return best;
}

// ---------------------------------------------------------------------------
// relative entropy of entanglement

namespace {

SepDivergence zero_for_member(const DensityOperator& rho, ApproxMode mode) {
  SepDivergence out;
  out.mode = mode;
  out.bits = 0;
  out.dual_bound = 0;
  out.status = DivergenceStatus::exact;
  out.certificate = rho;
  return out;
}

SepDivergence ree_ppt(const DensityOperator& rho, const Partition& partition, double tol) {
  const auto param = ppt_parametrization(rho.dims(), ppt_cuts(partition));
  RelEntropyProblem prob{rho.matrix(), param.sigma, param.constraints, std::nullopt};
  const auto res = minimize_relative_entropy(prob, tol);
  SepDivergence out;
  out.mode = ApproxMode::ppt;
  out.bits = res.value_bits;
  out.dual_bound = std::max(0.0, res.lower_bound_bits);
  out.gap = res.gap;
  out.iterations = res.iterations;
  out.status = res.converged ? DivergenceStatus::converged : DivergenceStatus::max_iter;
  out.regularization = res.regularization;
  out.certificate = DensityOperator::repaired(hermitian_part(res.sigma), rho.dims());
  return out;
}

/// Column generation: the master problem minimizes D(ρ‖Σ w_j P_j) over the
/// simplex of current atoms; new atoms come from the product-state oracle
/// applied to the negative gradient.
SepDivergence ree_ensemble(const DensityOperator& rho, const Partition& partition, double tol) {
  const auto& dims = rho.dims();
  const int d = dims.total();
  auto atoms = computational_atoms(dims, partition);
  SepDivergence out;
  out.mode = ApproxMode::ensemble;
  std::vector<double> weights;
  ComplexMatrix sigma;
  double value = kInfinity, regularization = 0;
  double gap = kInfinity;
  int rounds = 0;
  for (; rounds < 200; ++rounds) {
    const int n = static_cast<int>(atoms.size());
    const auto e = sum_zero_basis(n);
    RelEntropyProblem prob;
    prob.rho = rho.matrix();
    prob.argument.constant = ComplexMatrix::Zero(d, d);
    for (const auto& a : atoms) prob.argument.constant += a.projector / static_cast<double>(n);
    AffineVector w{Eigen::VectorXd::Constant(n, 1.0 / n), Eigen::MatrixXd(n, n - 1)};
    for (std::size_t a = 0; a < e.size(); ++a) {
      ComplexMatrix c = ComplexMatrix::Zero(d, d);
      for (int j = 0; j < n; ++j) c += e[a](j) * atoms[j].projector;
      prob.argument.coeffs.push_back(c);
      w.coeffs.col(static_cast<Eigen::Index>(a)) = e[a];
    }
    prob.nonnegative = std::move(w);
    const auto res = minimize_relative_entropy(prob, 0.1 * tol, false);
    weights.assign(n, 1.0 / n);
    for (std::size_t a = 0; a < e.size(); ++a)
      for (int j = 0; j < n; ++j) weights[j] += res.x(static_cast<Eigen::Index>(a)) * e[a](j);
    sigma = res.sigma;
    value = res.value_bits;
    regularization = res.regularization;

    // Frank–Wolfe gap over all product states: max⟨ψ|Dlog σ[ρ]|ψ⟩/ln2 − 1/ln2.
    const auto grad = log_frechet(hermitian_eig(hermitian_part(sigma)), rho.matrix());
    const auto best = best_product_state(grad, dims, partition, static_cast<std::uint64_t>(rounds));
    gap = std::max(0.0, (best.value - 1.0) / kLn2);
    if (gap <= tol) break;

    // Keep the master small: drop atoms the optimizer has abandoned.
    std::vector<Atom> kept;
    for (int j = 0; j < n; ++j)
      if (weights[j] > 1e-6 || n <= d) kept.push_back(atoms[j]);
    if (static_cast<int>(kept.size()) < d) kept = atoms;
    kept.push_back({best.states, best.projector});
    atoms = std::move(kept);
  }
  out.bits = value;
  out.gap = gap;
  out.dual_bound = std::max(0.0, value - gap);
  out.iterations = rounds;
  out.status = gap <= tol ? DivergenceStatus::converged : DivergenceStatus::max_iter;
  out.regularization = regularization;
  out.ensemble = make_ensemble(dims, partition, atoms, weights);
  out.certificate = DensityOperator::repaired(hermitian_part(sigma), dims);
  return out;
}

}  // namespace

SepDivergence ree(const DensityOperator& rho, const Partition& partition, ApproxMode mode, double tol) {
  partition.validate(rho.dims());
  if (rho.subnormalized()) throw Error(ErrorCode::Subnormalized, "ree needs a normalized state");
  if (!(tol > 0)) throw Error(ErrorCode::BadParameter, "tolerance must be positive");
  if (mode == ApproxMode::ppt) {
    if (is_ppt(rho, partition).ppt) return zero_for_member(rho, mode);
    return ree_ppt(rho, partition, tol);
  }
  return ree_ensemble(rho, partition, tol);
}

// ---------------------------------------------------------------------------
// smooth max-relative entropy of entanglement

namespace {

/// Adds the smoothing variables: returns ρ̄ (or nothing at eps = 0) and wires
/// the ball, trace and overlap constraints. `dominated` receives −ρ̄ (or −ρ).
std::optional<sdp::HermitianVar> add_smoothing(sdp::Problem& p, const DensityOperator& rho, double eps,
                                               int dominated) {
  if (eps == 0) {
    p.add_constant(dominated, -rho.matrix());
    return std::nullopt;
  }
  const int d = rho.dim();
  const auto bar = p.add_hermitian(d);
  p.add_term(dominated, bar, -1.0);
  const int pos = p.add_block(d);
  p.add_term(pos, bar);
  const int trace = p.add_block(1);
  p.add_constant(trace, ComplexMatrix::Constant(1, 1, 1.0));
  p.add_trace_term(trace, bar, -1.0);
  const Ball ball = add_ball(p, rho);
  const int r = static_cast<int>(ball.w.cols());
  const ComplexMatrix w = ball.w;
  p.add_term(ball.block, bar, 1.0, [w](const ComplexMatrix& m) { return ComplexMatrix(w.adjoint() * m * w); }, r, r);
  const int overlap = p.add_block(1);
  p.add_constant(overlap, ComplexMatrix::Constant(1, 1, -std::sqrt(1 - eps * eps)));
  p.add_trace_term(overlap, ball.x, 1.0);
  return bar;
}

SepDivergence emax_ppt(const DensityOperator& rho, const Partition& partition, double eps) {
  const auto& dims = rho.dims();
  sdp::Problem p;
  const auto s = p.add_hermitian(dims.total());
  p.add_cost(s, ComplexMatrix::Identity(dims.total(), dims.total()));
  add_ppt_blocks(p, s, dims, ppt_cuts(partition), ComplexMatrix());
  const int dominated = p.add_block(dims.total());
  p.add_term(dominated, s);
  const auto bar = add_smoothing(p, rho, eps, dominated);
  const auto sol = sdp::solve(p);
  if (!solution_usable(sol) || !(sol.primal_objective > 0))
    throw Error(ErrorCode::SolverFailure, "PPT smooth max-relative entropy SDP did not converge");
  SepDivergence out;
  out.mode = ApproxMode::ppt;
  out.bits = std::log2(sol.primal_objective);
  out.dual_bound = std::log2(std::max(sol.dual_objective, 1e-300));
  out.gap = std::max(0.0, out.bits - *out.dual_bound);
  out.iterations = sol.iterations;
  out.status = sol.ok() ? DivergenceStatus::converged : DivergenceStatus::max_iter;
  if (bar) out.certificate = DensityOperator::repaired(hermitian_part(bar->value(sol.y)), dims, true);
  return out;
}

SepDivergence emax_ensemble(const DensityOperator& rho, const Partition& partition, double eps) {
  const auto& dims = rho.dims();
  const int d = dims.total();
  auto atoms = computational_atoms(dims, partition);
  SepDivergence out;
  out.mode = ApproxMode::ensemble;
  sdp::Solution sol;
  std::vector<double> weights;
  std::optional<sdp::HermitianVar> bar;
  int rounds = 0;
  for (; rounds < 150; ++rounds) {
    const int n = static_cast<int>(atoms.size());
    sdp::Problem p;
    std::vector<int> w;
    for (int j = 0; j < n; ++j) w.push_back(p.add_variable(1.0));
    const int nonneg = p.add_block(n);
    for (int j = 0; j < n; ++j) {
      ComplexMatrix e = ComplexMatrix::Zero(n, n);
      e(j, j) = 1.0;
      p.add_coefficient(nonneg, w[j], e);
    }
    const int dominated = p.add_block(d);
    for (int j = 0; j < n; ++j) p.add_coefficient(dominated, w[j], atoms[j].projector);
    bar = add_smoothing(p, rho, eps, dominated);
    sol = sdp::solve(p);
    if (!solution_usable(sol)) throw Error(ErrorCode::SolverFailure, "ensemble smooth max-relative entropy SDP failed");
    weights.assign(sol.y.begin(), sol.y.begin() + n);
    // An atom P prices in when ⟨Y, P⟩ exceeds its unit cost.
    const auto best = best_product_state(sol.x[dominated], dims, partition, static_cast<std::uint64_t>(rounds));
    if (best.value <= 1.0 + 1e-7) break;
    std::vector<Atom> kept;
    for (int j = 0; j < n; ++j)
      if (weights[j] > 1e-9 * std::max(1.0, sol.primal_objective)) kept.push_back(atoms[j]);
    kept.push_back({best.states, best.projector});
    atoms = std::move(kept);
  }
  out.bits = std::log2(sol.primal_objective);
  out.iterations = rounds;
  out.status = DivergenceStatus::converged;
  out.ensemble = make_ensemble(dims, partition, atoms, weights);
  if (bar) out.certificate = DensityOperator::repaired(hermitian_part(bar->value(sol.y)), dims, true);
  return out;
}

}  // namespace

SepDivergence e_max_smooth(const DensityOperator& rho, const Partition& partition, double eps, ApproxMode mode) {
  partition.validate(rho.dims());
  if (rho.subnormalized()) throw Error(ErrorCode::Subnormalized, "smoothing needs a normalized state");
  if (!(eps >= 0 && eps < 1)) throw Error(ErrorCode::BadParameter, "eps must lie in [0, 1)");
  return mode == ApproxMode::ppt ? emax_ppt(rho, partition, eps) : emax_ensemble(rho, partition, eps);
}

// ---------------------------------------------------------------------------
// nearest separable state

namespace {

NearestSeparable nearest_ppt(const DensityOperator& s, const Partition& partition) {
  const auto& dims = s.dims();
  const int d = dims.total();
  sdp::Problem p;
  const auto sigma = p.add_hermitian(d, true);
  const ComplexMatrix mixed = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  add_ppt_blocks(p, sigma, dims, ppt_cuts(partition), mixed);
  const Ball ball = add_ball(p, s);
  const int r = static_cast<int>(ball.w.cols());
  const ComplexMatrix w = ball.w;
  p.add_constant(ball.block, w.adjoint() * mixed * w, r, r);
  p.add_term(ball.block, sigma, 1.0, [w](const ComplexMatrix& m) { return ComplexMatrix(w.adjoint() * m * w); }, r, r);
  p.add_trace_cost(ball.x, -1.0);
  const auto sol = sdp::solve(p);
  if (!solution_usable(sol)) throw Error(ErrorCode::SolverFailure, "nearest PPT state SDP did not converge");
  NearestSeparable out{0, DensityOperator::repaired(hermitian_part(mixed + sigma.value(sol.y)), dims),
                       ApproxMode::ppt, std::nullopt};
  out.distance = purified_distance(s, out.witness);
  return out;
}

NearestSeparable nearest_ensemble(const DensityOperator& s, const Partition& partition) {
  const auto& dims = s.dims();
  auto atoms = computational_atoms(dims, partition);
  std::vector<double> weights;
  for (int round = 0; round < 150; ++round) {
    const int n = static_cast<int>(atoms.size());
    sdp::Problem p;
    std::vector<int> w;
    for (int j = 0; j < n; ++j) w.push_back(p.add_variable());
    const int nonneg = p.add_block(n);
    for (int j = 0; j < n; ++j) {
      ComplexMatrix e = ComplexMatrix::Zero(n, n);
      e(j, j) = 1.0;
      p.add_coefficient(nonneg, w[j], e);
    }
    const int total = p.add_block(1);
    p.add_constant(total, ComplexMatrix::Constant(1, 1, 1.0));
    const Ball ball = add_ball(p, s);
    const int r = static_cast<int>(ball.w.cols());
    for (int j = 0; j < n; ++j) {
      p.add_coefficient(total, w[j], ComplexMatrix::Constant(1, 1, -1.0));
      p.add_coefficient(ball.block, w[j], ball.w.adjoint() * atoms[j].projector * ball.w, r, r);
    }
    p.add_trace_cost(ball.x, -1.0);
    const auto sol = sdp::solve(p);
    if (!solution_usable(sol)) throw Error(ErrorCode::SolverFailure, "nearest ensemble SDP did not converge");
    weights.assign(sol.y.begin(), sol.y.begin() + n);
    // Reduced cost of atom P: x_total − ⟨W X₂₂ W†, P⟩.
    const ComplexMatrix x22 = sol.x[ball.block].bottomRightCorner(r, r);
    const ComplexMatrix price = ball.w * x22 * ball.w.adjoint();
    const double threshold = sol.x[total](0, 0).real();
    const auto best = best_product_state(price, dims, partition, static_cast<std::uint64_t>(round));
    if (best.value <= threshold + 1e-8) break;
    std::vector<Atom> kept;
    for (int j = 0; j < n; ++j)
      if (weights[j] > 1e-9) kept.push_back(atoms[j]);
    kept.push_back({best.states, best.projector});
    atoms = std::move(kept);
  }
  auto ens = make_ensemble(dims, partition, atoms, weights);
  auto witness = realize(ens);
  NearestSeparable out{purified_distance(s, witness), witness, ApproxMode::ensemble, std::move(ens)};
  return out;
}

}  // namespace

NearestSeparable nearest_sep_distance(const DensityOperator& s, const Partition& partition, ApproxMode mode) {
  partition.validate(s.dims());
  if (s.subnormalized()) throw Error(ErrorCode::Subnormalized, "distance needs a normalized state");
  if (mode == ApproxMode::ppt) {
    if (is_ppt(s, partition).ppt) return {0.0, s, mode, std::nullopt};
    return nearest_ppt(s, partition);
  }
  return nearest_ensemble(s, partition);
}

}  // namespace disent
