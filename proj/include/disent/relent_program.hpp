#pragma once

// Minimization of D(ρ ‖ σ(x)) over a spectrahedron
//   { x : K_k(x) ⪰ 0 for all k },  σ(x), K_k(x) affine Hermitian in x.
// Solved by a log-det barrier method with exact Newton steps; the result is
// certified by the Frank–Wolfe gap at the returned point, whose linear
// minimization step is an SDP.

#include <optional>
#include <vector>

#include "disent/qmatrix.hpp"

namespace disent {

struct AffineHermitian {
  ComplexMatrix constant;
  std::vector<ComplexMatrix> coeffs;

  ComplexMatrix at(const Eigen::VectorXd& x) const;
};

/// Elementwise constraint constant + coeffs·x ≥ 0.
struct AffineVector {
  Eigen::VectorXd constant;
  Eigen::MatrixXd coeffs;  // rows = constant.size(), cols = number of variables
};

struct RelEntropyProblem {
  ComplexMatrix rho;
  AffineHermitian argument;
  std::vector<AffineHermitian> constraints;  // x = 0 must be strictly feasible
  std::optional<AffineVector> nonnegative;
};

struct RelEntropyResult {
  Eigen::VectorXd x;
  ComplexMatrix sigma;
  double value_bits = 0;        // D(ρ‖σ(x)) at the returned point
  double lower_bound_bits = 0;  // value − certified gap
  double gap = 0;
  int iterations = 0;           // Newton steps
  bool converged = false;
  double regularization = 0;    // weight of I/d mixed into σ, if any
};

/// With certify = false the Frank–Wolfe gap is skipped (gap and lower bound
/// are left at +∞ and −∞).
RelEntropyResult minimize_relative_entropy(const RelEntropyProblem& problem, double tol, bool certify = true);

/// First divided difference of the natural log, stable for close arguments.
double log_divided_difference(double a, double b);
/// Fréchet derivative of the natural matrix log at σ applied to h.
ComplexMatrix log_frechet(const EigenSystem& sigma, const ComplexMatrix& h);

}  // namespace disent
