#include "disent/protocol.hpp"

#include <cmath>
#include <limits>

#include "disent/convexsplit.hpp"
#include "disent/parallel.hpp"
#include "disent/states.hpp"

namespace disent {

namespace {

constexpr double kBoundSlack = 1e-3;
/// Dilation registers are materialized only below this total dimension.
constexpr int kDilationLimit = 4096;

std::string register_label(const std::string& label, int k) { return label + "." + std::to_string(k); }

/// Swaps registers 0 and i among m registers of dimension d each.
ComplexMatrix register_swap(int d, int m, int i) {
  int total = 1;
  for (int k = 0; k < m; ++k) total *= d;
  ComplexMatrix p = ComplexMatrix::Zero(total, total);
  std::vector<int> digits(m);
  for (int x = 0; x < total; ++x) {
    int rest = x;
    for (int k = m - 1; k >= 0; --k) {
      digits[k] = rest % d;
      rest /= d;
    }
    std::swap(digits[0], digits[i]);
    int y = 0;
    for (int k = 0; k < m; ++k) y = y * d + digits[k];
    p(y, x) = 1;
  }
  return p;
}

void check_eps_delta(double eps, double delta) {
  if (!(delta > 0) || !(eps >= delta) || !(eps <= 1))
    throw Error(ErrorCode::BadParameter, "need 1 >= eps >= delta > 0");
}

/// Positive partial transpose is equivalent to separability here.
bool ppt_exact(const SubsystemDims& dims, const Partition& partition) {
  if (partition.groups.size() != 2) return false;
  const int a = dims.dim_of(partition.groups[0]);
  const int b = dims.dim_of(partition.groups[1]);
  return a * b <= 6;
}

ComplexMatrix pinch(const ComplexMatrix& sigma, const ComplexMatrix& rho) {
  const auto eig = hermitian_eig(rho);
  const Eigen::Index n = eig.values.size();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && eig.values(start) - eig.values(end) <= 1e-9) ++end;
    const ComplexMatrix v = eig.vectors.middleCols(start, end - start);
    out += v * (v.adjoint() * sigma * v) * v.adjoint();
    start = end;
  }
  return hermitian_part(out);
}

/// Smallest η with (1−η)σ + ηI/d PPT on every cut (bisection; the minimum
/// eigenvalue is concave in η).
double ppt_mixing(const ComplexMatrix& sigma, const SubsystemDims& dims, const Partition& partition) {
  const ComplexMatrix flat = ComplexMatrix::Identity(sigma.rows(), sigma.cols()) / static_cast<double>(sigma.rows());
  auto margin = [&](double eta) {
    const DensityOperator mixed = DensityOperator::trusted(hermitian_part((1 - eta) * sigma + eta * flat), dims);
    return is_ppt(mixed, partition).min_eigenvalue;
  };
  if (margin(0) >= 0) return 0;
  double lo = 0, hi = 1;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) >= 0 ? hi : lo) = mid;
  }
  return hi;
}

struct SearchOutcome {
  int budget = 1;
  int M = 0;  // 0 when even the budget fails
  double distance = 1;
};

/// Walks M down from the budget while the certified distance stays ≤ eps.
SearchOutcome search_down(const DensityOperator& rho, const DensityOperator& sigma, double eps, int budget,
                          bool search) {
  SearchOutcome out;
  out.budget = budget;
  out.distance = convex_split_distance(rho, sigma, budget).distance;
  if (out.distance > eps) return out;
  out.M = budget;
  if (!search) return out;
  for (int m = budget - 1; m >= 1; --m) {
    const double d = convex_split_distance(rho, sigma, m).distance;
    if (d > eps) break;
    out.M = m;
    out.distance = d;
  }
  return out;
}

DensityOperator product_of_marginals(const DensityOperator& rho, const Partition& partition) {
  DensityOperator prod = partial_trace(rho, partition.groups.front());
  for (std::size_t g = 1; g < partition.groups.size(); ++g)
    prod = tensor_product(prod, partial_trace(rho, partition.groups[g]));
  return permute(prod, rho.dims().labels());
}

ProtocolReport base_report(double eps, double delta, const TheoremBounds& bounds) {
  ProtocolReport r;
  r.eps_target = eps;
  r.delta = delta;
  r.lower_bound_bits = bounds.lower_bits;
  r.upper_bound_bits = bounds.upper_bits;
  return r;
}

void finish(ProtocolReport& r) {
  r.log2_M = r.M > 0 ? std::log2(static_cast<double>(r.M)) : 0;
  r.pass = r.M > 0 && r.achieved_distance <= r.eps_target && r.lower_bound_bits <= r.log2_M + 1e-6 &&
           r.log2_M <= r.upper_bound_bits + kBoundSlack;
}

/// Separable inputs need no registers at all (exact regime only).
std::optional<ProtocolReport> trivial_report(const DensityOperator& rho, const Partition& partition, double eps,
                                             double delta, const TheoremBounds& bounds) {
  if (!ppt_exact(rho.dims(), partition) || !is_ppt(rho, partition).ppt) return std::nullopt;
  ProtocolReport r = base_report(eps, delta, bounds);
  r.M = 1;
  r.budget_M = 1;
  r.achieved_distance = 0;
  r.approx_mode = "ppt-exact";
  r.catalyst_id = "none";
  finish(r);
  return r;
}

DecoupleResult decouple(const DensityOperator& rho, const DensityOperator& sigma, std::string approx_mode,
                        double eps, double delta) {
  check_eps_delta(eps, delta);
  DecoupleResult out;
  out.approx_mode = std::move(approx_mode);
  const SearchOutcome s = search_down(rho, sigma, eps, disentangling_budget(rho, sigma, eps, delta), true);
  out.budget_M = s.budget;
  out.M = s.M > 0 ? s.M : s.budget;
  out.distance = s.distance;
  out.discarded_bits = 2 * std::log2(static_cast<double>(out.M));
  double total = static_cast<double>(out.M) * out.M;
  for (int k = 0; k < out.M && total <= kDilationLimit; ++k) total *= rho.dim();
  if (total <= kDilationLimit) {
    const DensityOperator dilated =
        gamma_dilation(build_swap_ensemble(out.M, rho.dims()), catalyst_input(rho, sigma, out.M));
    Labels keep = dilated.dims().labels();
    keep.resize(keep.size() - 2);  // drop Xa, Xb
    out.residual = partial_trace(dilated, keep);
  }
  return out;
}

}  // namespace

void UnitaryEnsemble::validate() const {
  if (M < 1) throw Error(ErrorCode::BadParameter, "ensemble needs M >= 1");
  for (const auto& p : per_party) {
    if (static_cast<int>(p.unitaries.size()) != M)
      throw Error(ErrorCode::BadParameter, "every party needs M unitaries");
    for (const auto& u : p.unitaries)
      if (!is_unitary(u, 1e-10)) throw Error(ErrorCode::BadParameter, "ensemble entry is not unitary");
  }
}

DensityOperator apply_randomizing_map(const UnitaryEnsemble& ens, const DensityOperator& s) {
  ens.validate();
  for (const auto& p : ens.per_party)
    if (s.dims().dim_of(p.on) != p.unitaries.front().rows())
      throw Error(ErrorCode::DimMismatch, "unitary size does not match its registers");
  ComplexMatrix sum = ComplexMatrix::Zero(s.dim(), s.dim());
  for (int i = 0; i < ens.M; ++i) {
    ComplexMatrix m = s.matrix();
    for (const auto& p : ens.per_party) m = conjugate_local(m, s.dims(), p.unitaries[i], p.on);
    sum += m;
  }
  return DensityOperator::trusted(hermitian_part(sum / static_cast<double>(ens.M)), s.dims(), s.subnormalized());
}

UnitaryEnsemble build_swap_ensemble(int M, const SubsystemDims& party_dims) {
  if (M < 1) throw Error(ErrorCode::BadParameter, "swap ensemble needs M >= 1");
  UnitaryEnsemble ens;
  ens.M = M;
  for (const auto& party : party_dims.parties()) {
    LocalUnitaries lu;
    for (int k = 1; k <= M; ++k) lu.on.push_back(register_label(party.label, k));
    for (int i = 0; i < M; ++i) lu.unitaries.push_back(register_swap(party.dim, M, i));
    ens.per_party.push_back(std::move(lu));
  }
  return ens;
}

DensityOperator catalyst_input(const DensityOperator& rho, const DensityOperator& sigma, int M) {
  if (rho.dims().dims() != sigma.dims().dims()) throw Error(ErrorCode::DimMismatch, "rho and sigma differ in shape");
  if (M < 1) throw Error(ErrorCode::BadParameter, "M must be >= 1");
  DensityOperator out = rho.relabeled(rho.dims().suffixed(".1"));
  for (int k = 2; k <= M; ++k) out = tensor_product(out, sigma.relabeled(rho.dims().suffixed("." + std::to_string(k))));
  return out;
}

DensityOperator gamma_dilation(const UnitaryEnsemble& ens, const DensityOperator& s) {
  ens.validate();
  if (ens.per_party.empty()) throw Error(ErrorCode::BadParameter, "ensemble has no parties");
  const int m = ens.M;
  if (static_cast<double>(s.dim()) * m * m > kDilationLimit)
    throw Error(ErrorCode::DimensionBlowup, "dilation exceeds " + std::to_string(kDilationLimit) + " dimensions");
  DensityOperator out = tensor_product(s, maxcorr_state(m, "Xa", "Xb"));
  ComplexMatrix op = out.matrix();
  for (std::size_t p = 0; p < ens.per_party.size(); ++p) {
    const auto& lu = ens.per_party[p];
    const std::string control = p == 0 ? "Xa" : "Xb";
    const Eigen::Index d = lu.unitaries.front().rows();
    // Σᵢ Uⁱ ⊗ |i⟩⟨i| on (registers, control).
    ComplexMatrix controlled = ComplexMatrix::Zero(d * m, d * m);
    for (int i = 0; i < m; ++i) {
      ComplexMatrix proj = ComplexMatrix::Zero(m, m);
      proj(i, i) = 1;
      controlled += kron(lu.unitaries[i], proj);
    }
    Labels on = lu.on;
    on.push_back(control);
    op = conjugate_local(op, out.dims(), controlled, on);
  }
  return DensityOperator::trusted(hermitian_part(op), out.dims(), s.subnormalized());
}

InequalityCheck check_operator_inequality(const DensityOperator& sigma_ext, const DensityOperator& sigma_marginal,
                                          int M) {
  if (M < 1) throw Error(ErrorCode::BadParameter, "M must be >= 1");
  const SubsystemDims target = sigma_marginal.dims().concat(SubsystemDims({"Xa", "Xb"}, {M, M}));
  if (sigma_ext.dims().dims().size() != target.size())
    throw Error(ErrorCode::DimMismatch, "extension must add exactly Xa and Xb");
  const DensityOperator ext = permute(sigma_ext, target.labels());
  if (!(ext.dims() == target)) throw Error(ErrorCode::DimMismatch, "extension registers do not match M");

  const int d = sigma_marginal.dim();
  const Eigen::Index mm = static_cast<Eigen::Index>(M) * M;
  // Π on XaXb projects onto span{|ii⟩}; the extension must be classical there.
  ComplexMatrix pi = ComplexMatrix::Zero(mm, mm);
  for (int i = 0; i < M; ++i) pi(i * M + i, i * M + i) = 1;
  const ComplexMatrix big_pi = kron(ComplexMatrix::Identity(d, d), pi);
  const ComplexMatrix& e = ext.matrix();
  if ((big_pi * e * big_pi - e).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorCode::PreconditionViolated, "extension leaves the maximally correlated subspace");
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          if (std::abs(e(a * mm + i * M + i, b * mm + j * M + j)) > 1e-9)
            throw Error(ErrorCode::PreconditionViolated, "extension is not classical on the X registers");
    }
  std::vector<ComplexMatrix> blocks;
  for (int i = 0; i < M; ++i) {
    ComplexMatrix block(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) block(a, b) = e(a * mm + i * M + i, b * mm + i * M + i);
    blocks.push_back(block);
  }
  return classical_extension_check(sigma_marginal.matrix(), blocks);
}

InequalityCheck classical_extension_check(const ComplexMatrix& marginal, const std::vector<ComplexMatrix>& blocks) {
  InequalityCheck out;
  // Off the correlated subspace the difference vanishes (present when M > 1).
  out.slack = blocks.size() > 1 ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) out.slack = std::min(out.slack, min_eigenvalue(hermitian_part(marginal - b)));
  out.holds = out.slack >= -1e-9;
  return out;
}

SeparableCatalyst catalyst_from_ensemble(std::string id, const ProductEnsemble& ens) {
  ens.validate();
  return {std::move(id), realize(ens), ens};
}

TheoremBounds theorem_bounds(const DensityOperator& rho, const Partition& partition, double eps, double delta) {
  check_eps_delta(eps, delta);
  TheoremBounds b;
  b.lower_bits = e_max_smooth(rho, partition, eps, ApproxMode::ppt).bits;
  b.upper_bits = e_max_smooth(rho, partition, eps - delta, ApproxMode::ppt).bits + std::log2(1 / delta) + 1;
  return b;
}

PreparedCatalyst prepare_catalyst(const DensityOperator& rho, const SeparableCatalyst& cat, const Partition& partition,
                                  const ProtocolOptions& options) {
  if (rho.dims().dims() != cat.sigma.dims().dims())
    throw Error(ErrorCode::DimMismatch, "catalyst and state differ in shape");
  partition.validate(rho.dims());
  const DensityOperator sigma = cat.sigma.relabeled(rho.dims());
  const std::string ppt_tag = ppt_exact(rho.dims(), partition) ? "ppt-exact" : "ppt";

  const bool refine = options.refine && !commute(rho.matrix(), sigma.matrix());
  if (!refine && cat.ensemble) return {sigma, "ensemble", false};
  if (!is_ppt(sigma, partition).ppt)
    throw Error(ErrorCode::PreconditionViolated, "catalyst '" + cat.id + "' is not PPT");

  ComplexMatrix m = refine ? pinch(sigma.matrix(), rho.matrix()) : sigma.matrix();
  // Pinching keeps trace and positivity; PPT is restored by a little noise.
  const double eta = ppt_mixing(m, rho.dims(), partition);
  if (eta > 0) {
    const ComplexMatrix flat = ComplexMatrix::Identity(m.rows(), m.cols()) / static_cast<double>(m.rows());
    m = (1 - eta) * m + eta * flat;
  }
  return {DensityOperator::repaired(hermitian_part(m), rho.dims()), ppt_tag, refine};
}

int disentangling_budget(const DensityOperator& rho, const DensityOperator& sigma, double eps, double delta) {
  check_eps_delta(eps, delta);
  const double zeta = eps - delta;
  const DivergenceValue d = zeta > 0 ? smooth_d_max(rho, sigma, zeta) : d_max(rho, sigma);
  if (!d.finite()) throw Error(ErrorCode::InfeasibleSupport, "rho is not supported on the catalyst's support");
  // ξ = δ/2; the floor keeps log2 M within the printed budget.
  const double ratio = std::exp2(d.bits) * 2 / delta;
  if (ratio > 1e9) throw Error(ErrorCode::DimensionBlowup, "register budget exceeds 1e9");
  return std::max(1, static_cast<int>(std::floor(ratio * (1 + 1e-12))));
}

ProtocolReport run_disentangling(const DensityOperator& rho, const SeparableCatalyst& cat, const Partition& partition,
                                 double eps, double delta, const ProtocolOptions& options) {
  const TheoremBounds bounds = theorem_bounds(rho, partition, eps, delta);
  if (auto r = trivial_report(rho, partition, eps, delta, bounds)) return *r;
  const PreparedCatalyst prep = prepare_catalyst(rho, cat, partition, options);
  ProtocolReport r = base_report(eps, delta, bounds);
  r.catalyst_id = cat.id;
  r.approx_mode = prep.approx_mode;
  r.M = r.budget_M = disentangling_budget(rho, prep.sigma, eps, delta);
  r.achieved_distance = convex_split_distance(rho, prep.sigma, r.M).distance;
  finish(r);
  return r;
}

std::vector<SeparableCatalyst> default_candidates(const DensityOperator& rho, const Partition& partition) {
  std::vector<SeparableCatalyst> out;
  out.push_back({"nearest", nearest_sep_distance(rho, partition, ApproxMode::ppt).witness, std::nullopt});
  const SepDivergence r = ree(rho, partition, ApproxMode::ppt);
  if (r.certificate) out.push_back({"ree", *r.certificate, std::nullopt});
  out.push_back({"mixed", maximally_mixed(rho.dims()), std::nullopt});
  return out;
}

ProtocolReport one_shot_cost_search(const DensityOperator& rho, const Partition& partition, double eps, double delta,
                                    const std::vector<SeparableCatalyst>& candidates,
                                    const ProtocolOptions& options) {
  if (candidates.empty()) throw Error(ErrorCode::BadParameter, "no catalyst candidates");
  const TheoremBounds bounds = theorem_bounds(rho, partition, eps, delta);
  if (auto r = trivial_report(rho, partition, eps, delta, bounds)) return *r;

  std::optional<ProtocolReport> best;
  std::optional<ProtocolReport> closest;  // least distance among failures
  std::optional<Error> last_error;
  for (const auto& cat : candidates) {
    try {
      const PreparedCatalyst prep = prepare_catalyst(rho, cat, partition, options);
      const SearchOutcome s =
          search_down(rho, prep.sigma, eps, disentangling_budget(rho, prep.sigma, eps, delta), true);
      ProtocolReport r = base_report(eps, delta, bounds);
      r.catalyst_id = cat.id;
      r.approx_mode = prep.approx_mode;
      r.budget_M = s.budget;
      r.M = s.M > 0 ? s.M : s.budget;
      r.achieved_distance = s.distance;
      finish(r);
      if (s.M > 0) {
        if (!best || r.M < best->M) best = r;
      } else if (!closest || r.achieved_distance < closest->achieved_distance) {
        closest = r;
      }
    } catch (const Error& e) {
      last_error = e;
    }
  }
  if (best) return *best;
  if (closest) return *closest;
  throw *last_error;
}

DecoupleResult decouple_to_separable(const DensityOperator& rho, const SeparableCatalyst& cat,
                                     const Partition& partition, double eps, double delta,
                                     const ProtocolOptions& options) {
  check_eps_delta(eps, delta);
  if (ppt_exact(rho.dims(), partition) && is_ppt(rho, partition).ppt) {
    DecoupleResult out;
    out.distance = 0;
    out.residual = rho;
    out.approx_mode = "ppt-exact";
    return out;
  }
  const PreparedCatalyst prep = prepare_catalyst(rho, cat, partition, options);
  return decouple(rho, prep.sigma, prep.approx_mode, eps, delta);
}

DecoupleResult decouple_to_product(const DensityOperator& rho, const Partition& partition, double eps, double delta,
                                   const ProtocolOptions&) {
  partition.validate(rho.dims());
  return decouple(rho, product_of_marginals(rho, partition), "product", eps, delta);
}

std::vector<TheoremCase> default_theorem_grid() {
  const Partition ab = Partition::split({"A"}, {"B"});
  std::vector<TheoremCase> grid;
  for (const auto& [id, rho] : {std::pair{std::string("bell"), bell_state()},
                                std::pair{std::string("werner:0.9"), werner_state(0.9)}})
    for (const auto& [eps, delta] : {std::pair{0.2, 0.1}, std::pair{0.3, 0.1}})
      grid.push_back({id, rho, ab, eps, delta});
  return grid;
}

std::vector<TheoremRow> verify_theorem(const std::vector<TheoremCase>& grid, int threads) {
  std::vector<TheoremRow> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), threads, [&](int i) {
    const auto& c = grid[i];
    rows[i].state_id = c.state_id;
    try {
      rows[i].report = one_shot_cost_search(c.rho, c.partition, c.eps, c.delta, default_candidates(c.rho, c.partition));
    } catch (const Error& e) {
      rows[i].error = e.what();
      rows[i].report.eps_target = c.eps;
      rows[i].report.delta = c.delta;
    }
  });
  return rows;
}

}  // namespace disent
