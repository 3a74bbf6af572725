#include "disent/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "disent/convexsplit.hpp"
#include "disent/protocol.hpp"
#include "disent/relent_program.hpp"
#include "disent/sdp.hpp"

namespace disent {

namespace {

constexpr double kChannelTol = 1e-9;
constexpr int kExplicitLimit = 512;
constexpr int kConverseLimit = 4096;

Labels complement(const SubsystemDims& dims, const Labels& drop) {
  Labels out;
  for (const auto& l : dims.labels())
    if (std::find(drop.begin(), drop.end(), l) == drop.end()) out.push_back(l);
  return out;
}

/// Sub-dims in the order of `labels`.
SubsystemDims pick(const SubsystemDims& dims, const Labels& labels) { return dims.select(labels).reorder(labels); }

Labels concat(Labels a, const Labels& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// Σᵢⱼ S_{ij} ⊗ J_{ij}: S on (rest, in), J on (in, out); result on (rest, out).
ComplexMatrix contract(const ComplexMatrix& s, int d_in, const ComplexMatrix& j, int d_out) {
  const int d_rest = static_cast<int>(s.rows()) / d_in;
  ComplexMatrix out = ComplexMatrix::Zero(d_rest * d_out, d_rest * d_out);
  ComplexMatrix sb(d_rest, d_rest);
  for (int i = 0; i < d_in; ++i)
    for (int k = 0; k < d_in; ++k) {
      for (int r = 0; r < d_rest; ++r)
        for (int q = 0; q < d_rest; ++q) sb(r, q) = s(r * d_in + i, q * d_in + k);
      out += kron(sb, j.block(i * d_out, k * d_out, d_out, d_out));
    }
  return out;
}

/// Linear part of (I_B ⊗ R)(ρ_BC) for an arbitrary Choi-shaped operator j.
struct RecoveryMap {
  ComplexMatrix rho_bc;  // ordered (rest, c)
  SubsystemDims out_dims;
  Labels target_order;
  int d_in = 0;
  int d_out = 0;

  RecoveryMap(const DensityOperator& s, const SubsystemDims& in_dims, const SubsystemDims& r_out,
              const Labels& c) {
    for (const auto& l : in_dims.labels())
      if (std::find(c.begin(), c.end(), l) == c.end())
        throw Error(ErrorCode::DimMismatch, "channel input must be the conditioning registers");
    Labels dropped;
    for (const auto& l : r_out.labels())
      if (std::find(c.begin(), c.end(), l) == c.end()) dropped.push_back(l);
    const Labels rest = complement(s.dims(), concat(dropped, c));
    const Labels kept = concat(rest, in_dims.labels());
    const DensityOperator bc = partial_trace(s, kept);
    rho_bc = permute(bc, kept).matrix();
    out_dims = s.dims().select(rest).concat(r_out);
    target_order = s.dims().labels();
    d_in = in_dims.total();
    d_out = r_out.total();
  }

  ComplexMatrix operator()(const ComplexMatrix& j) const {
    return permute(contract(rho_bc, d_in, j, d_out), out_dims, target_order);
  }
};

void check_tripartite(const DensityOperator& s, const Labels& a, const Labels& b, const Labels& c) {
  Labels all = concat(concat(a, b), c);
  if (a.empty() || b.empty() || c.empty()) throw Error(ErrorCode::BadPartition, "empty part");
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw Error(ErrorCode::BadPartition, "parts overlap");
  if (all.size() != s.dims().size()) throw Error(ErrorCode::BadPartition, "parts do not cover every party");
  for (const auto& l : all)
    if (!s.dims().contains(l)) throw Error(ErrorCode::BadPartition, "unknown label '" + l + "'");
}

/// J = I/d_out + Σ x_k (H_k ⊗ T_k): H Hermitian on the input, T traceless on
/// the output, so every x is trace preserving.
std::vector<ComplexMatrix> tp_directions(int d_in, int d_out) {
  std::vector<ComplexMatrix> out;
  for (const auto& h : sdp::hermitian_basis(d_in, false))
    for (const auto& t : sdp::hermitian_basis(d_out, true)) out.push_back(kron(h, t));
  return out;
}

ChannelChoi channel_at(const ComplexMatrix& j, const SubsystemDims& in, const SubsystemDims& out) {
  return {hermitian_part(j), in, out};
}

/// Controlled register swaps: Σᵢ (1 i)^{⊗labels} ⊗ |i⟩⟨i|_control.
ComplexMatrix controlled_swaps(const Labels& group, const SubsystemDims& single, int m) {
  const UnitaryEnsemble ens = build_swap_ensemble(m, pick(single, group));
  ComplexMatrix out = ComplexMatrix::Zero(1, 1);
  for (int i = 0; i < m; ++i) {
    ComplexMatrix u = ComplexMatrix::Ones(1, 1);
    for (const auto& lu : ens.per_party) u = kron(u, lu.unitaries[i]);
    ComplexMatrix proj = ComplexMatrix::Zero(m, m);
    proj(i, i) = 1;
    const ComplexMatrix term = kron(u, proj);
    if (out.rows() != term.rows()) out = ComplexMatrix::Zero(term.rows(), term.cols());
    out += term;
  }
  return out;
}

Labels register_labels(const Labels& group, int m) {
  Labels out;
  for (const auto& l : group)
    for (int k = 1; k <= m; ++k) out.push_back(l + "." + std::to_string(k));
  return out;
}

}  // namespace

void ChannelChoi::validate() const {
  const int din = in_dims.total();
  const int dout = out_dims.total();
  if (choi.rows() != din * dout || choi.cols() != din * dout)
    throw Error(ErrorCode::DimMismatch, "Choi matrix does not match its dims");
  if (hermiticity_error(choi) > kChannelTol) throw Error(ErrorCode::InvalidState, "Choi matrix is not Hermitian");
  if (min_eigenvalue(hermitian_part(choi)) < -kChannelTol)
    throw Error(ErrorCode::InvalidState, "channel is not completely positive");
  ComplexMatrix tr = ComplexMatrix::Zero(din, din);
  for (int i = 0; i < din; ++i)
    for (int k = 0; k < din; ++k) tr(i, k) = choi.block(i * dout, k * dout, dout, dout).trace();
  if ((tr - ComplexMatrix::Identity(din, din)).cwiseAbs().maxCoeff() > kChannelTol)
    throw Error(ErrorCode::InvalidState, "channel is not trace preserving");
}

DensityOperator apply_channel(const ChannelChoi& ch, const DensityOperator& s, const Labels& on) {
  if (pick(s.dims(), on).dims() != ch.in_dims.dims())
    throw Error(ErrorCode::DimMismatch, "registers do not match the channel input");
  const Labels rest = complement(s.dims(), on);
  const ComplexMatrix ordered = permute(s, concat(rest, on)).matrix();
  const SubsystemDims out_dims = s.dims().select(rest).concat(ch.out_dims);
  ComplexMatrix out = contract(ordered, ch.in_dims.total(), ch.choi, ch.out_dims.total());
  return DensityOperator::trusted(hermitian_part(out), out_dims, s.subnormalized());
}

ChannelChoi petz_map(const DensityOperator& s, const Labels& from, const Labels& rebuild) {
  const Labels ac = concat(rebuild, from);
  const ComplexMatrix rho_ac = permute(partial_trace(s, ac), ac).matrix();
  const ComplexMatrix rho_c = permute(partial_trace(s, from), from).matrix();
  const int da = s.dims().dim_of(rebuild);
  const int dc = s.dims().dim_of(from);

  const auto eig = hermitian_eig(rho_c);
  Eigen::Index r = 0;
  while (r < eig.values.size() && eig.values(r) > 1e-12) ++r;
  const ComplexMatrix v = eig.vectors.leftCols(r);
  RealVector inv(r);
  for (Eigen::Index i = 0; i < r; ++i) inv(i) = 1 / std::sqrt(eig.values(i));
  const ComplexMatrix inv_sqrt = v * inv.asDiagonal() * v.adjoint();
  const ComplexMatrix off = ComplexMatrix::Identity(dc, dc) - v * v.adjoint();
  const ComplexMatrix root = matrix_fn(rho_ac, MatrixFunction::sqrt, false);

  const int dout = da * dc;
  ComplexMatrix j = ComplexMatrix::Zero(dc * dout, dc * dout);
  for (int i = 0; i < dc; ++i)
    for (int k = 0; k < dc; ++k) {
      ComplexMatrix x = ComplexMatrix::Zero(dc, dc);
      x(i, k) = 1;
      ComplexMatrix block = root * kron(ComplexMatrix::Identity(da, da), inv_sqrt * x * inv_sqrt) * root;
      // Trace-and-replace on the kernel of ρ_C keeps the map trace preserving.
      block += off(k, i) * rho_ac;
      j.block(i * dout, k * dout, dout, dout) = block;
    }
  return channel_at(j, pick(s.dims(), from), pick(s.dims(), rebuild).concat(pick(s.dims(), from)));
}

DensityOperator recovered_state(const DensityOperator& s, const ChannelChoi& r, const Labels& c) {
  const RecoveryMap map(s, r.in_dims, r.out_dims, c);
  return DensityOperator::trusted(hermitian_part(map(r.choi)), s.dims());
}

RecoveryValue rel_entropy_of_recovery(const DensityOperator& s, const Labels& a, const Labels& b, const Labels& c,
                                      double tol) {
  check_tripartite(s, a, b, c);
  if (s.subnormalized()) throw Error(ErrorCode::Subnormalized, "recovery needs a normalized state");
  const ChannelChoi petz = petz_map(s, c, a);
  const DensityOperator petz_state = recovered_state(s, petz, c);

  const RecoveryMap map(s, petz.in_dims, petz.out_dims, c);
  const int din = petz.in_dims.total();
  const int dout = petz.out_dims.total();
  const ComplexMatrix j0 = ComplexMatrix::Identity(din * dout, din * dout) / static_cast<double>(dout);
  RelEntropyProblem problem;
  problem.rho = s.matrix();
  problem.argument.constant = hermitian_part(map(j0));
  AffineHermitian choi{j0, {}};
  for (const auto& dir : tp_directions(din, dout)) {
    problem.argument.coeffs.push_back(map(dir));
    choi.coeffs.push_back(dir);
  }
  problem.constraints.push_back(choi);
  const RelEntropyResult res = minimize_relative_entropy(problem, tol);

  RecoveryValue out;
  out.petz_bits = relative_entropy(s, petz_state).bits;
  out.iterations = res.iterations;
  out.gap = res.gap;
  out.status = res.converged ? DivergenceStatus::converged : DivergenceStatus::max_iter;
  out.dual_bound = std::max(0.0, res.lower_bound_bits);
  if (res.value_bits <= out.petz_bits) {
    out.bits = std::max(0.0, res.value_bits);
    out.channel = channel_at(choi.at(res.x), petz.in_dims, petz.out_dims);
    out.certificate = DensityOperator::repaired(hermitian_part(res.sigma), s.dims());
  } else {
    out.bits = out.petz_bits;
    out.channel = petz;
    out.certificate = petz_state;
  }
  return out;
}

RecoveryFidelity fidelity_of_recovery(const DensityOperator& s, const Labels& a, const Labels& b, const Labels& c) {
  check_tripartite(s, a, b, c);
  const ChannelChoi petz = petz_map(s, c, a);
  const RecoveryMap map(s, petz.in_dims, petz.out_dims, c);
  const int din = petz.in_dims.total();
  const int dout = petz.out_dims.total();
  const int n = s.dim();
  const ComplexMatrix j0 = ComplexMatrix::Identity(din * dout, din * dout) / static_cast<double>(dout);
  const auto dirs = tp_directions(din, dout);

  // F(ρ, σ) = max Re Tr X subject to [[ρ, X], [X†, σ]] ⪰ 0.
  sdp::Problem p;
  const int choi_block = p.add_block(din * dout);
  const int fid_block = p.add_block(2 * n);
  p.add_constant(choi_block, j0);
  p.add_constant(fid_block, s.matrix());
  p.add_constant(fid_block, hermitian_part(map(j0)), n, n);
  std::vector<int> vars;
  for (const auto& dir : dirs) {
    const int v = p.add_variable();
    vars.push_back(v);
    p.add_coefficient(choi_block, v, dir);
    p.add_coefficient(fid_block, v, hermitian_part(map(dir)), n, n);
  }
  const auto x = p.add_complex(n, n);
  p.add_term(fid_block, x, 1.0, 0, n);
  p.add_trace_cost(x, -1.0);

  const auto sol = sdp::solve(p);
  const double f = -sol.primal_objective;
  const bool usable = sol.ok() || (std::abs(sol.gap) <= 1e-6 * std::max(1.0, std::abs(f)) &&
                                   sol.primal_infeasibility <= 1e-6);
  if (!usable) throw Error(ErrorCode::SolverFailure, "fidelity of recovery SDP did not converge");
  RecoveryFidelity out;
  out.fidelity = std::clamp(f, 0.0, 1.0);
  out.lower_bound_bits = out.fidelity > 0 ? -2 * std::log2(out.fidelity) : kInfinity;
  ComplexMatrix j = j0;
  for (std::size_t k = 0; k < vars.size(); ++k) j += sol.y[vars[k]] * dirs[k];
  out.channel = channel_at(j, petz.in_dims, petz.out_dims);
  return out;
}

int recovery_budget(const DensityOperator& rho, const Labels& a, const Labels& c, double eps, double delta) {
  const DensityOperator target = recovered_state(rho, petz_map(rho, c, a), c);
  return disentangling_budget(rho, target, eps, delta);
}

DegradingReport simulate_recovery_degrading(const DensityOperator& rho, const Labels& a, const Labels& b,
                                            const Labels& c, int M, double eps) {
  check_tripartite(rho, a, b, c);
  if (M < 1) throw Error(ErrorCode::BadParameter, "M must be >= 1");
  if (!(eps > 0 && eps <= 1)) throw Error(ErrorCode::BadParameter, "eps must lie in (0, 1]");
  const DensityOperator target = recovered_state(rho, petz_map(rho, c, a), c);

  DegradingReport out;
  out.M = M;
  out.log2_M = std::log2(static_cast<double>(M));
  out.eps_target = eps;
  out.dmax_bits = d_max(rho, target).bits;
  out.petz_distance = purified_distance(rho, target);
  out.cmi_bits = conditional_mutual_information(rho, a, b, c);
  out.rec_value_bits = rel_entropy_of_recovery(rho, a, b, c).bits;
  if (std::isfinite(out.dmax_bits)) out.budget_M = registers_for(rho, target, 0, eps).N;

  double total = 1;
  for (int k = 0; k < M; ++k) total *= rho.dim();
  if (total <= kExplicitLimit) {
    // Small enough to run the swap ensemble on the catalyst explicitly.
    const DensityOperator output = apply_randomizing_map(build_swap_ensemble(M, rho.dims()),
                                                         catalyst_input(rho, target, M));
    out.distance = purified_distance(output, tensor_power(target, M));
  } else {
    out.distance = convex_split_distance(rho, target, M).distance;
  }
  out.pass = out.distance <= eps;
  return out;
}

ConverseCheck appendix_converse_check(const DensityOperator& rho, const Labels& a, const Labels& b, const Labels& c,
                                      int M) {
  check_tripartite(rho, a, b, c);
  if (M < 1) throw Error(ErrorCode::BadParameter, "M must be >= 1");
  ConverseCheck out;
  if (M == 1) {
    out.holds = true;
    return out;
  }
  const Labels bc = concat(b, c);
  const DensityOperator rho_bc = permute(partial_trace(rho, bc), bc);
  double big = static_cast<double>(M) * M * M;
  for (int k = 0; k < M; ++k) big *= rho_bc.dim();
  double blocks = 1;
  for (int k = 0; k < M; ++k) blocks *= rho.dim();
  if (big > kConverseLimit || blocks > kConverseLimit)
    throw Error(ErrorCode::DimensionBlowup, "converse check exceeds " + std::to_string(kConverseLimit) + " dimensions");

  // (i) Controlled C-swaps on ρ_BC^{⊗M} ⊗ γ equal the same swaps on B.
  ComplexMatrix gamma = ComplexMatrix::Zero(M * M * M, M * M * M);
  for (int i = 0; i < M; ++i) gamma(i * M * M + i * M + i, i * M * M + i * M + i) = 1.0 / M;
  const DensityOperator power = tensor_power(rho_bc, M);
  const SubsystemDims dims = power.dims().concat(SubsystemDims({"XA", "XB", "XC"}, {M, M, M}));
  const ComplexMatrix alpha = kron(power.matrix(), gamma);
  const ComplexMatrix vc = controlled_swaps(c, rho.dims(), M);
  const ComplexMatrix vb = controlled_swaps(b, rho.dims(), M);
  const ComplexMatrix lhs = conjugate_local(alpha, dims, vc, concat(register_labels(c, M), {"XC"}));
  const ComplexMatrix rhs = conjugate_local(alpha, dims, vb, concat(register_labels(b, M), {"XB"}));
  out.commutation_residual = (lhs - rhs).cwiseAbs().maxCoeff();

  // (ii) β = V(ρ^{⊗M} ⊗ γ)V† is classical on X with blocks Uⁱρ^{⊗M}Uⁱ†/M.
  const UnitaryEnsemble ens = build_swap_ensemble(M, rho.dims());
  const DensityOperator full = tensor_power(rho, M);
  std::vector<ComplexMatrix> parts;
  ComplexMatrix marginal = ComplexMatrix::Zero(full.dim(), full.dim());
  for (int i = 0; i < M; ++i) {
    ComplexMatrix m = full.matrix();
    for (const auto& lu : ens.per_party) m = conjugate_local(m, full.dims(), lu.unitaries[i], lu.on);
    parts.push_back(m / static_cast<double>(M));
    marginal += parts.back();
  }
  const InequalityCheck ineq = classical_extension_check(marginal, parts);
  out.slack = ineq.slack;
  out.holds = out.commutation_residual <= 1e-9 && ineq.holds;
  return out;
}

}  // namespace disent
