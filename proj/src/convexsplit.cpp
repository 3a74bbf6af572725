#include "disent/convexsplit.hpp"

#include <cmath>
#include <limits>

#include "disent/divergences.hpp"
#include "disent/parallel.hpp"
#include "disent/states.hpp"

namespace disent {

namespace {

/// Occupation types with more terms than this are refused.
constexpr double kTypeLimit = 2e7;
/// P = √(1 − F²) resolves F only to ~1e-15, so P carries ~5e-8 noise near 0.
constexpr double kSweepSlack = 1e-7;

void check_pair(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dims().dims() != sigma.dims().dims())
    throw Error(ErrorCode::DimMismatch, "rho and sigma live on different spaces");
}

void check_dense(int dim, int n) {
  double total = 1;
  for (int k = 0; k < n; ++k) total *= dim;
  if (total > kDenseLimit)
    throw Error(ErrorCode::DimensionBlowup,
                "convex split needs dim^N <= " + std::to_string(kDenseLimit) + ", got " + std::to_string(dim) + "^" +
                    std::to_string(n));
}

ComplexMatrix kron_power(const ComplexMatrix& m, int n) {
  ComplexMatrix out = m;
  for (int k = 1; k < n; ++k) out = kron(out, m);
  return out;
}

/// (1/N) Σᵢ σ^{⊗(i)} ⊗ ρ ⊗ σ^{⊗(N−1−i)}; ρ may be subnormalized.
ComplexMatrix split_matrix(const ComplexMatrix& rho, const ComplexMatrix& sigma, int n) {
  const Eigen::Index d = sigma.rows();
  Eigen::Index total = 1;
  for (int k = 0; k < n; ++k) total *= d;
  ComplexMatrix tau = ComplexMatrix::Zero(total, total);
  // prefix[i] = σ^{⊗i}, built once.
  std::vector<ComplexMatrix> prefix(n);
  prefix[0] = ComplexMatrix::Identity(1, 1);
  for (int i = 1; i < n; ++i) prefix[i] = kron(prefix[i - 1], sigma);
  for (int i = 0; i < n; ++i) tau += kron(kron(prefix[i], rho), prefix[n - 1 - i]);
  return tau / static_cast<double>(n);
}

/// ‖√τ √(σ^{⊗N})‖₁ with √(σ^{⊗N}) = (√σ)^{⊗N}.
double dense_fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma, int n) {
  const ComplexMatrix tau = split_matrix(rho, sigma, n);
  const ComplexMatrix root = kron_power(matrix_fn(sigma, MatrixFunction::sqrt, false), n);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(root * tau * root), Eigen::EigenvaluesOnly);
  double f = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) f += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return f;
}

struct JointSpectrum {
  RealVector p;
  RealVector q;
};

/// Diagonals of ρ and σ in a joint eigenbasis; empty when none was found.
std::optional<JointSpectrum> joint_spectrum(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  if (!commute(rho, sigma)) return std::nullopt;
  // A generic combination splits every degeneracy the pair does not share.
  const auto eig = hermitian_eig(hermitian_part(sigma + 0.6180339887498949 * rho));
  const ComplexMatrix pr = eig.vectors.adjoint() * rho * eig.vectors;
  const ComplexMatrix sr = eig.vectors.adjoint() * sigma * eig.vectors;
  const double off = std::max((pr - ComplexMatrix(pr.diagonal().asDiagonal())).cwiseAbs().maxCoeff(),
                              (sr - ComplexMatrix(sr.diagonal().asDiagonal())).cwiseAbs().maxCoeff());
  if (off > 1e-9) return std::nullopt;
  return JointSpectrum{pr.diagonal().real(), sr.diagonal().real()};
}

/// Σ over occupation types n of multinomial(N; n) Πq^n √((1/N) Σ n_k p_k/q_k).
/// Basis states sharing a type have the same τ and σ^{⊗N} eigenvalue ratio.
double commuting_fidelity(const JointSpectrum& js, int n) {
  std::vector<double> logq, ratio;
  for (Eigen::Index k = 0; k < js.q.size(); ++k) {
    // Types touching q = 0 carry no weight in σ^{⊗N}.
    if (js.q(k) <= 1e-300) continue;
    logq.push_back(std::log(js.q(k)));
    ratio.push_back(std::max(0.0, js.p(k)) / js.q(k));
  }
  const int m = static_cast<int>(logq.size());
  if (m == 0) return 0;
  const double count = std::exp(std::lgamma(n + m) - std::lgamma(n + 1) - std::lgamma(m));
  if (count > kTypeLimit) throw Error(ErrorCode::DimensionBlowup, "too many occupation types for the convex split");

  const double lognf = std::lgamma(n + 1.0);
  std::vector<int> occ(m, 0);
  double f = 0;
  // Depth-first enumeration of compositions of n into m parts.
  auto visit = [&](auto&& self, int k, int left, double logw, double mix) -> void {
    if (k == m - 1) {
      occ[k] = left;
      const double lw = logw + left * logq[k] - std::lgamma(left + 1.0);
      const double r = mix + left * ratio[k];
      f += std::exp(lognf + lw) * std::sqrt(r / n);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      occ[k] = c;
      self(self, k + 1, left - c, logw + c * logq[k] - std::lgamma(c + 1.0), mix + c * ratio[k]);
    }
  };
  visit(visit, 0, n, 0.0, 0.0);
  return f;
}

double fidelity_of_split(const ComplexMatrix& rho, const ComplexMatrix& sigma, int n, bool& commuting) {
  if (const auto js = joint_spectrum(rho, sigma)) {
    commuting = true;
    return commuting_fidelity(*js, n);
  }
  commuting = false;
  check_dense(static_cast<int>(sigma.rows()), n);
  return dense_fidelity(rho, sigma, n);
}

SplitDistance distance_from(double f, bool commuting) {
  SplitDistance out;
  out.fidelity = std::clamp(f, 0.0, 1.0);
  out.distance = std::sqrt(std::max(0.0, 1 - out.fidelity * out.fidelity));
  out.commuting_path = commuting;
  return out;
}

}  // namespace

void ConvexSplitSpec::validate() const {
  check_pair(rho, sigma);
  if (N < 1) throw Error(ErrorCode::BadParameter, "N must be >= 1");
  if (!(zeta >= 0) || !(xi > 0) || zeta + xi > 1)
    throw Error(ErrorCode::BadParameter, "need zeta >= 0, xi > 0, zeta + xi <= 1");
}

bool commute(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  return (a * b - b * a).cwiseAbs().maxCoeff() <= tol;
}

DensityOperator build_convex_split(const ConvexSplitSpec& spec) {
  check_pair(spec.rho, spec.sigma);
  if (spec.N < 1) throw Error(ErrorCode::BadParameter, "N must be >= 1");
  check_dense(spec.sigma.dim(), spec.N);
  SubsystemDims dims = spec.sigma.dims().suffixed(".1");
  for (int k = 2; k <= spec.N; ++k) dims = dims.concat(spec.sigma.dims().suffixed("." + std::to_string(k)));
  return DensityOperator::trusted(split_matrix(spec.rho.matrix(), spec.sigma.matrix(), spec.N), std::move(dims),
                                  spec.rho.subnormalized());
}

SplitDistance convex_split_distance(const DensityOperator& rho, const DensityOperator& sigma, int N) {
  check_pair(rho, sigma);
  if (N < 1) throw Error(ErrorCode::BadParameter, "N must be >= 1");
  if (sigma.subnormalized()) throw Error(ErrorCode::Subnormalized, "sigma must be normalized");
  bool commuting = false;
  const double f = fidelity_of_split(rho.matrix(), sigma.matrix(), N, commuting);
  // Generalized fidelity: σ is normalized, so the trace-deficit term vanishes.
  return distance_from(f, commuting);
}

SplitDistance convex_split_distance(const ConvexSplitSpec& spec) {
  return convex_split_distance(spec.rho, spec.sigma, spec.N);
}

RegisterCount registers_for(const DensityOperator& rho, const DensityOperator& sigma, double zeta, double xi) {
  if (!(zeta >= 0) || !(xi > 0)) throw Error(ErrorCode::BadParameter, "need zeta >= 0 and xi > 0");
  const DivergenceValue d = zeta > 0 ? smooth_d_max(rho, sigma, zeta) : d_max(rho, sigma);
  if (!d.finite()) throw Error(ErrorCode::InfeasibleSupport, "rho is not supported on supp sigma");
  const double ratio = std::exp2(d.bits) / xi;
  if (ratio > 1e9) throw Error(ErrorCode::DimensionBlowup, "register count exceeds 1e9");
  RegisterCount out;
  out.dmax_bits = d.bits;
  // Guard against ratios a rounding step above an integer.
  out.N = std::max(1, static_cast<int>(std::ceil(ratio * (1 - 1e-12))));
  return out;
}

LemmaRow verify_lemma_row(const LemmaInstance& inst) {
  LemmaRow row;
  row.rho_id = inst.rho_id;
  row.sigma_id = inst.sigma_id;
  row.zeta = inst.zeta;
  row.xi = inst.xi;
  row.bound = inst.zeta + inst.xi;
  row.measured_P = std::numeric_limits<double>::quiet_NaN();
  row.smoothed_P = std::numeric_limits<double>::quiet_NaN();
  try {
    const DivergenceValue d = inst.zeta > 0 ? smooth_d_max(inst.rho, inst.sigma, inst.zeta)
                                            : d_max(inst.rho, inst.sigma);
    const RegisterCount rc = registers_for(inst.rho, inst.sigma, inst.zeta, inst.xi);
    row.N = rc.N;
    row.dmax_bits = rc.dmax_bits;
    for (int n = 1; n <= rc.N; ++n) row.sweep.push_back(convex_split_distance(inst.rho, inst.sigma, n).distance);
    row.measured_P = row.sweep.back();
    for (std::size_t i = 1; i < row.sweep.size(); ++i)
      if (row.sweep[i] > row.sweep[i - 1] + kSweepSlack) row.monotone = false;
    const ComplexMatrix smoothed = d.certificate ? d.certificate->matrix() : inst.rho.matrix();
    try {
      bool commuting = false;
      row.smoothed_P =
          distance_from(fidelity_of_split(smoothed, inst.sigma.matrix(), rc.N, commuting), commuting).distance;
    } catch (const Error&) {
      // ρ̄ rarely commutes exactly with σ; past the dense limit it stays NaN.
    }
    row.pass = row.measured_P <= row.bound + 1e-12;
  } catch (const Error& e) {
    row.error = e.what();
    row.pass = false;
  }
  return row;
}

std::vector<LemmaRow> verify_lemma(const std::vector<LemmaInstance>& grid, int threads) {
  std::vector<LemmaRow> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), threads, [&](int i) { rows[i] = verify_lemma_row(grid[i]); });
  return rows;
}

}  // namespace disent

namespace disent {

namespace {

DensityOperator bell_diagonal(const std::vector<double>& w) {
  const double r = 1 / std::sqrt(2.0);
  ComplexMatrix basis = ComplexMatrix::Zero(4, 4);
  // Columns |Φ+⟩, |Φ−⟩, |Ψ+⟩, |Ψ−⟩.
  basis(0, 0) = r, basis(3, 0) = r;
  basis(0, 1) = r, basis(3, 1) = -r;
  basis(1, 2) = r, basis(2, 2) = r;
  basis(1, 3) = r, basis(2, 3) = -r;
  RealVector d(4);
  for (int i = 0; i < 4; ++i) d(i) = w[i];
  return DensityOperator(hermitian_part(basis * d.asDiagonal() * basis.adjoint()), SubsystemDims({"A", "B"}, {2, 2}));
}

DensityOperator mix(const DensityOperator& a, const DensityOperator& b, double t) {
  return DensityOperator(hermitian_part((1 - t) * a.matrix() + t * b.matrix()), a.dims());
}

}  // namespace

std::vector<LemmaInstance> default_lemma_grid(std::uint64_t seed) {
  Rng rng(seed);
  const SubsystemDims qubit({"A"}, {2});
  const SubsystemDims pair({"A", "B"}, {2, 2});
  // Product of two random qubits, kept away from the boundary so D_max stays
  // small enough for N <= 5.
  const DensityOperator half = maximally_mixed(qubit);
  const DensityOperator product = tensor_product(mix(random_state(rng, qubit, 1), half, 0.5),
                                                 mix(random_state(rng, qubit, 1), half, 0.5).relabeled(
                                                     SubsystemDims({"B"}, {2})));
  const std::vector<std::pair<std::string, DensityOperator>> sigmas = {
      {"mixed", maximally_mixed(pair)},
      {"bell_diag", bell_diagonal({0.4, 0.3, 0.2, 0.1})},
      {"werner0.3", werner_state(0.3)},
      {"product", product},
  };
  std::vector<LemmaInstance> grid;
  for (const auto& [sid, sigma] : sigmas) {
    grid.push_back({"same", sid, sigma, sigma, 0.05, 0.5});
    const DensityOperator omega_a = random_state(rng, pair, 2);
    const DensityOperator omega_b = random_state(rng, pair, 4);
    for (double xi : {0.3, 0.5}) {
      grid.push_back({"near_rank2", sid, mix(sigma, omega_a, 0.1), sigma, 0.05, xi});
      grid.push_back({"near_rank4", sid, mix(sigma, omega_b, 0.15), sigma, 0.05, xi});
    }
  }
  // Commuting rows reach larger N through the occupation-type sum.
  const DensityOperator bd = bell_diagonal({0.4, 0.3, 0.2, 0.1});
  grid.push_back({"bell_diag_shift", "bell_diag", bell_diagonal({0.45, 0.3, 0.15, 0.1}), bd, 0.05, 0.2});
  grid.push_back({"bell_diag_shift", "bell_diag", bell_diagonal({0.45, 0.3, 0.15, 0.1}), bd, 0.05, 0.1});
  grid.push_back({"zero_x_mixed", "mixed",
                  tensor_product(PureState(ComplexVector::Unit(2, 0), qubit).projector(),
                                 maximally_mixed(SubsystemDims({"B"}, {2}))),
                  maximally_mixed(pair), 0.0, 0.5});
  return grid;
}

}  // namespace disent
