#pragma once

// Entropies and divergences, all in bits. Infinite values are returned as
// +∞ rather than thrown.

#include <limits>
#include <string_view>
#include <optional>

#include "disent/qmatrix.hpp"

namespace disent {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class DivergenceStatus { exact, converged, max_iter, infeasible };

struct DivergenceValue {
  double bits = 0;
  std::optional<DensityOperator> certificate;  // optimizer or feasible point
  std::optional<double> dual_bound;            // certified lower bound, bits
  DivergenceStatus status = DivergenceStatus::exact;
  int iterations = 0;
  double gap = 0;  // bits − dual_bound when a dual bound is known

  bool finite() const { return bits < kInfinity; }
};

std::string_view to_string(DivergenceStatus status);

double von_neumann_entropy(const DensityOperator& s);
/// Entropy of the marginal on `labels`.
double marginal_entropy(const DensityOperator& s, const Labels& labels);

DivergenceValue relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

/// I(A:B) = H(A) + H(B) − H(AB); a and b must partition the labels.
double mutual_information(const DensityOperator& s, const Labels& a, const Labels& b);
/// I(A:B|C) = H(AC) + H(BC) − H(ABC) − H(C); a, b, c must partition the labels.
double conditional_mutual_information(const DensityOperator& s, const Labels& a, const Labels& b,
                                      const Labels& c);

/// log2 of the least λ with ρ ≤ λσ.
DivergenceValue d_max(const DensityOperator& rho, const DensityOperator& sigma);
/// Minimum of d_max(ρ̄‖σ) over subnormalized ρ̄ with P(ρ̄, ρ) ≤ eps.
DivergenceValue smooth_d_max(const DensityOperator& rho, const DensityOperator& sigma, double eps);
/// Minimum of 2 log2 Tr √ρ̄ over subnormalized ρ̄ within eps of the marginal
/// on `party`.
DivergenceValue smooth_max_entropy(const DensityOperator& s, const Labels& party, double eps);

/// Isometry whose columns span the eigenvectors of m with eigenvalue above tol.
ComplexMatrix support_isometry(const ComplexMatrix& m, double tol = 1e-12);

}  // namespace disent
