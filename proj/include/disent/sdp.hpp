#pragma once

// Dense primal-dual interior-point solver for complex Hermitian linear matrix
// inequalities.
//
//   minimize   cᵀy
//   subject to Z_k(y) = C_k + Σ_a y_a F_{k,a} ⪰ 0     for every block k
//
// with dual   maximize −Σ_k ⟨C_k, X_k⟩  s.t.  Σ_k ⟨F_{k,a}, X_k⟩ = c_a, X_k ⪰ 0.
// ⟨A, B⟩ = Re Tr(A B). Search direction: HKM with Mehrotra predictor-corrector.

#include <functional>
#include <vector>

#include "disent/qmatrix.hpp"

namespace disent::sdp {

struct Entry {
  int row;
  int col;
  cplx value;
};

/// Block of real variables representing a Hermitian d×d matrix in an
/// orthonormal basis (traceless variant omits the identity direction).
struct HermitianVar {
  int dim = 0;
  std::vector<int> ids;
  std::vector<ComplexMatrix> basis;

  ComplexMatrix value(const std::vector<double>& y) const;
};

/// Block of real variables representing a general complex r×c matrix.
struct ComplexVar {
  int rows = 0;
  int cols = 0;
  std::vector<int> ids;
  std::vector<ComplexMatrix> basis;

  ComplexMatrix value(const std::vector<double>& y) const;
};

/// Orthonormal basis of d×d Hermitian matrices under ⟨A,B⟩ = Re Tr(AB);
/// the traceless variant drops the identity direction.
std::vector<ComplexMatrix> hermitian_basis(int dim, bool traceless);

using LinearMap = std::function<ComplexMatrix(const ComplexMatrix&)>;

class Problem {
 public:
  int add_variable(double cost = 0.0);
  HermitianVar add_hermitian(int dim, bool traceless = false);
  ComplexVar add_complex(int rows, int cols);

  int add_block(int size);
  int block_size(int block) const { return sizes_[block]; }
  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_blocks() const { return static_cast<int>(sizes_.size()); }

  void add_cost(int var, double value) { cost_[var] += value; }
  /// Adds Re Tr(G X) to the objective.
  void add_cost(const HermitianVar& var, const ComplexMatrix& g, double scale = 1.0);
  /// Adds Re Tr(X) (scaled) to the objective.
  void add_trace_cost(const ComplexVar& var, double scale);

  /// Places m at (row, col) of the constant; off-diagonal placements also
  /// receive m† at the mirrored position.
  void add_constant(int block, const ComplexMatrix& m, int row = 0, int col = 0);
  void add_coefficient(int block, int var, const ComplexMatrix& m, int row = 0, int col = 0);
  /// For each basis element B: adds scale · map(B) at (row, col).
  void add_term(int block, const HermitianVar& var, double scale = 1.0, const LinearMap& map = {}, int row = 0,
                int col = 0);
  void add_term(int block, const ComplexVar& var, double scale = 1.0, int row = 0, int col = 0);
  /// scalar block entry += scale · Re Tr(X) for a complex variable.
  void add_trace_term(int block, const ComplexVar& var, double scale);
  void add_trace_term(int block, const HermitianVar& var, double scale);

  const std::vector<double>& cost() const { return cost_; }
  const ComplexMatrix& constant(int block) const { return constants_[block]; }
  /// Sparse coefficient lists: coefficients()[block] is a list of (var, entries).
  const std::vector<std::vector<std::pair<int, std::vector<Entry>>>>& coefficients() const { return coeffs_; }

 private:
  std::vector<double> cost_;
  std::vector<int> sizes_;
  std::vector<ComplexMatrix> constants_;
  std::vector<std::vector<std::pair<int, std::vector<Entry>>>> coeffs_;
};

struct Options {
  double gap_tol = 1e-7;
  double feas_tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.95;
};

enum class Status { optimal, max_iter, numerical_error, infeasible };

struct Solution {
  Status status = Status::numerical_error;
  std::vector<double> y;
  std::vector<ComplexMatrix> x;  // dual matrices
  std::vector<ComplexMatrix> z;  // slack matrices Z_k(y)
  double primal_objective = 0;   // cᵀy
  double dual_objective = 0;     // −Σ⟨C,X⟩
  double gap = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  int iterations = 0;

  bool ok() const { return status == Status::optimal; }
};

Solution solve(const Problem& problem, const Options& options = {});

}  // namespace disent::sdp
