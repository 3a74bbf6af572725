#include "disent/divergences.hpp"

#include <algorithm>
#include <cmath>

#include "disent/sdp.hpp"

namespace disent {

namespace {

constexpr double kSupportLeak = 1e-10;

double entropy_of_spectrum(const RealVector& values) {
  double h = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (v > 1e-300) h -= v * std::log2(v);
  }
  return h;
}

void check_same_space(const DensityOperator& a, const DensityOperator& b) {
  if (a.dims().dims() != b.dims().dims())
    throw Error(ErrorCode::DimMismatch, "operands live on different spaces");
}

void check_partition(const DensityOperator& s, const std::vector<const Labels*>& parts) {
  Labels all;
  for (const auto* p : parts) {
    if (p->empty()) throw Error(ErrorCode::BadPartition, "empty part");
    for (const auto& l : *p) {
      if (!s.dims().contains(l)) throw Error(ErrorCode::BadPartition, "unknown label '" + l + "'");
      all.push_back(l);
    }
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw Error(ErrorCode::BadPartition, "parts overlap");
  if (all.size() != s.dims().size()) throw Error(ErrorCode::BadPartition, "parts do not cover every party");
}

Labels join(const Labels& a, const Labels& b) {
  Labels out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

DivergenceValue infinite(DivergenceStatus status = DivergenceStatus::exact) {
  DivergenceValue v;
  v.bits = kInfinity;
  v.status = status;
  return v;
}

/// Weight of ρ outside the support spanned by the isometry v.
double leak(const ComplexMatrix& rho, const ComplexMatrix& v) {
  return rho.trace().real() - (v.adjoint() * rho * v).trace().real();
}

}  // namespace

std::string_view to_string(DivergenceStatus status) {
  switch (status) {
    case DivergenceStatus::exact: return "exact";
    case DivergenceStatus::converged: return "converged";
    case DivergenceStatus::max_iter: return "max_iter";
    case DivergenceStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

ComplexMatrix support_isometry(const ComplexMatrix& m, double tol) {
  const auto eig = hermitian_eig(m);
  Eigen::Index r = 0;
  while (r < eig.values.size() && eig.values(r) > tol) ++r;
  return eig.vectors.leftCols(r);
}

double von_neumann_entropy(const DensityOperator& s) {
  if (s.subnormalized()) throw Error(ErrorCode::Subnormalized, "entropy needs a normalized state");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  return std::max(0.0, entropy_of_spectrum(es.eigenvalues()));
}

double marginal_entropy(const DensityOperator& s, const Labels& labels) {
  return von_neumann_entropy(partial_trace(s, labels));
}

DivergenceValue relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_space(rho, sigma);
  const auto es = hermitian_eig(sigma.matrix());
  Eigen::Index r = 0;
  while (r < es.values.size() && es.values(r) > 1e-12) ++r;
  const ComplexMatrix v = es.vectors.leftCols(r);
  if (leak(rho.matrix(), v) > kSupportLeak) return infinite();
  const ComplexMatrix rt = v.adjoint() * rho.matrix() * v;
  double cross = 0;
  for (Eigen::Index i = 0; i < r; ++i) cross -= rt(i, i).real() * std::log2(es.values(i));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> er(rho.matrix(), Eigen::EigenvaluesOnly);
  DivergenceValue out;
  out.bits = std::max(0.0, cross - entropy_of_spectrum(er.eigenvalues()));
  out.dual_bound = out.bits;
  return out;
}

double mutual_information(const DensityOperator& s, const Labels& a, const Labels& b) {
  check_partition(s, {&a, &b});
  const double v = marginal_entropy(s, a) + marginal_entropy(s, b) - von_neumann_entropy(s);
  return std::max(0.0, v);
}

double conditional_mutual_information(const DensityOperator& s, const Labels& a, const Labels& b,
                                      const Labels& c) {
  check_partition(s, {&a, &b, &c});
  const double v = marginal_entropy(s, join(a, c)) + marginal_entropy(s, join(b, c)) - von_neumann_entropy(s) -
                   marginal_entropy(s, c);
  return std::max(0.0, v);
}

DivergenceValue d_max(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_space(rho, sigma);
  const auto es = hermitian_eig(sigma.matrix());
  Eigen::Index r = 0;
  while (r < es.values.size() && es.values(r) > 1e-12) ++r;
  const ComplexMatrix v = es.vectors.leftCols(r);
  if (leak(rho.matrix(), v) > kSupportLeak) return infinite();
  RealVector inv_sqrt(r);
  for (Eigen::Index i = 0; i < r; ++i) inv_sqrt(i) = 1.0 / std::sqrt(es.values(i));
  const ComplexMatrix w = v * inv_sqrt.asDiagonal();
  const double lambda = max_eigenvalue(hermitian_part(w.adjoint() * rho.matrix() * w));
  DivergenceValue out;
  if (!(lambda > 0)) return out;
  out.bits = std::log2(lambda);
  out.dual_bound = out.bits;
  return out;
}

DivergenceValue smooth_d_max(const DensityOperator& rho, const DensityOperator& sigma, double eps) {
  check_same_space(rho, sigma);
  if (!(eps >= 0 && eps < 1)) throw Error(ErrorCode::BadParameter, "eps must lie in [0, 1)");
  if (rho.subnormalized()) throw Error(ErrorCode::Subnormalized, "smoothing needs a normalized state");
  if (eps == 0) return d_max(rho, sigma);

  const ComplexMatrix v = support_isometry(sigma.matrix());
  const ComplexMatrix w = support_isometry(rho.matrix());
  const double c = std::sqrt(1 - eps * eps);
  // F(ρ, ρ̄) ≤ √Tr(Π_σ ρ) for any ρ̄ supported on supp σ.
  const double reach = std::sqrt(std::max(0.0, (v.adjoint() * rho.matrix() * v).trace().real()));
  if (reach < c - 1e-12) return infinite(DivergenceStatus::infeasible);

  const int rs = static_cast<int>(v.cols());
  const int rr = static_cast<int>(w.cols());
  // σ is rescaled so the optimal λ is O(1): the unsmoothed ratio for the
  // compressed ρ bounds it from above.
  const ComplexMatrix sigma_raw = hermitian_part(v.adjoint() * sigma.matrix() * v);
  const ComplexMatrix inv_root = matrix_fn(sigma_raw, MatrixFunction::sqrt).inverse();
  const double scale =
      std::max(1e-300, max_eigenvalue(hermitian_part(inv_root * v.adjoint() * rho.matrix() * v * inv_root)));
  const ComplexMatrix sigma_s = scale * sigma_raw;
  const ComplexMatrix rho_s = hermitian_part(w.adjoint() * rho.matrix() * w);
  const ComplexMatrix wv = w.adjoint() * v;

  sdp::Problem p;
  const int lambda = p.add_variable(1.0);
  const auto bar = p.add_hermitian(rs);
  const auto x = p.add_complex(rr, rr);

  const int dominance = p.add_block(rs);
  p.add_coefficient(dominance, lambda, sigma_s);
  p.add_term(dominance, bar, -1.0);
  const int positive = p.add_block(rs);
  p.add_term(positive, bar);
  const int trace = p.add_block(1);
  p.add_constant(trace, ComplexMatrix::Constant(1, 1, 1.0));
  p.add_trace_term(trace, bar, -1.0);
  const int ball = p.add_block(2 * rr);
  p.add_constant(ball, rho_s);
  p.add_term(ball, x, 1.0, 0, rr);
  p.add_term(ball, bar, 1.0, [&](const ComplexMatrix& m) { return ComplexMatrix(wv * m * wv.adjoint()); }, rr, rr);
  const int overlap = p.add_block(1);
  p.add_constant(overlap, ComplexMatrix::Constant(1, 1, -c));
  p.add_trace_term(overlap, x, 1.0);

  const auto sol = sdp::solve(p);
  const double primal = sol.primal_objective * scale;
  const double dual = sol.dual_objective * scale;
  // Badly conditioned σ can stall the interior point short of gap_tol; a
  // near-feasible primal with a small relative gap is still reported, with
  // status max_iter and the gap attached.
  const bool usable = sol.ok() || (std::abs(sol.gap) <= 1e-3 * std::max(1.0, std::abs(sol.primal_objective)) &&
                                   sol.primal_infeasibility <= 1e-6);
  if (!usable || !(primal > 0))
    throw Error(ErrorCode::SolverFailure, "smooth max-relative entropy SDP did not converge");

  DivergenceValue out;
  out.bits = std::log2(primal);
  out.dual_bound = std::log2(std::max(dual, 1e-300));
  out.gap = std::max(0.0, out.bits - *out.dual_bound);
  out.status = sol.ok() ? DivergenceStatus::converged : DivergenceStatus::max_iter;
  out.iterations = sol.iterations;
  const ComplexMatrix rbar = v * bar.value(sol.y) * v.adjoint();
  // Interior-point iterates can sit just outside the cone; clip that noise.
  const auto eig = hermitian_eig(hermitian_part(rbar));
  const ComplexMatrix clipped =
      eig.vectors * eig.values.cwiseMax(0.0).cast<cplx>().asDiagonal() * eig.vectors.adjoint();
  out.certificate = DensityOperator::repaired(hermitian_part(clipped), rho.dims(), true);
  return out;
}

DivergenceValue smooth_max_entropy(const DensityOperator& s, const Labels& party, double eps) {
  if (!(eps >= 0 && eps < 1)) throw Error(ErrorCode::BadParameter, "eps must lie in [0, 1)");
  if (s.subnormalized()) throw Error(ErrorCode::Subnormalized, "smoothing needs a normalized state");
  const DensityOperator marginal = partial_trace(s, party);
  const auto eig = hermitian_eig(marginal.matrix());
  const Eigen::Index n = eig.values.size();
  // Diagonal smoothing is optimal: with x = √spec(ρ̄) and a = √spec(ρ),
  // minimize Σx subject to ‖x‖ ≤ 1, a·x ≥ c, x ≥ 0.
  RealVector a(n);
  for (Eigen::Index i = 0; i < n; ++i) a(i) = std::sqrt(std::max(0.0, eig.values(i)));
  const double c = std::sqrt(1 - eps * eps);
  RealVector x = RealVector::Zero(n);
  Eigen::Index ties = 0;
  while (ties < n && a(ties) >= a(0) * (1 - 1e-12)) ++ties;
  if (c <= a(0) * std::sqrt(static_cast<double>(ties))) {
    // Unit ball inactive: spread c/a_max evenly over the top eigenvalues.
    x.head(ties).setConstant(c / (a(0) * static_cast<double>(ties)));
  } else {
    auto shaped = [&](double t) {
      RealVector y = (a.array() - t).max(0.0).matrix();
      return RealVector(y / y.norm());
    };
    // a·shaped(t) decreases from ‖a‖ = 1 at t = 0 to a_max √ties as t → a_max.
    double lo = 0, hi = a(0);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (a.dot(shaped(mid)) >= c)
        lo = mid;
      else
        hi = mid;
    }
    x = shaped(lo);
  }
  DivergenceValue out;
  out.bits = 2 * std::log2(x.sum());
  out.dual_bound = out.bits;
  const ComplexMatrix rbar = eig.vectors * x.array().square().matrix().asDiagonal() * eig.vectors.adjoint();
  out.certificate = DensityOperator::repaired(hermitian_part(rbar), marginal.dims(), true);
  return out;
}

}  // namespace disent
