#pragma once

// Dense complex operator algebra over labelled multipartite Hilbert spaces.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disent/error.hpp"

namespace disent {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Labels = std::vector<std::string>;

inline constexpr double kTolHerm = 1e-10;
inline constexpr double kTolPsd = 1e-9;
inline constexpr double kTolTrace = 1e-9;
inline constexpr double kTolNorm = 1e-10;

struct Party {
  std::string label;
  int dim = 1;

  bool operator==(const Party&) const = default;
};

/// Ordered register structure of a Hilbert space. The first party is the most
/// significant digit of the computational-basis index.
class SubsystemDims {
 public:
  SubsystemDims() = default;
  explicit SubsystemDims(std::vector<Party> parties);
  /// Convenience: labels and dims of equal length.
  SubsystemDims(const Labels& labels, const std::vector<int>& dims);

  const std::vector<Party>& parties() const { return parties_; }
  std::size_t size() const { return parties_.size(); }
  int total() const;
  Labels labels() const;
  std::vector<int> dims() const;

  bool contains(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;  // throws UnknownLabel
  int dim_of(const std::string& label) const;
  /// Product of the local dimensions of `labels`.
  int dim_of(const Labels& labels) const;

  SubsystemDims concat(const SubsystemDims& other) const;
  /// Parties in `keep`, in this object's order.
  SubsystemDims select(const Labels& keep) const;
  /// Parties in exactly the order given.
  SubsystemDims reorder(const Labels& order) const;
  /// Copy with every label suffixed (".k"), for tensor powers.
  SubsystemDims suffixed(const std::string& suffix) const;

  bool operator==(const SubsystemDims&) const = default;

 private:
  std::vector<Party> parties_;
};

/// Hermitian positive semidefinite operator with unit (or sub-unit) trace.
/// Immutable after construction.
class DensityOperator {
 public:
  /// Validates every invariant; throws NotHermitian / NegativeEigenvalue /
  /// InvalidState / DimMismatch.
  DensityOperator(ComplexMatrix op, SubsystemDims dims, bool subnormalized = false);

  /// Clips eigenvalues in [-kTolPsd, 0) to zero and renormalizes (normalized
  /// states only). Larger violations still throw.
  static DensityOperator repaired(ComplexMatrix op, SubsystemDims dims, bool subnormalized = false);

  /// For operators produced by positivity-preserving maps of valid states.
  /// Hermiticity and trace are still checked; the spectral check is skipped.
  static DensityOperator trusted(ComplexMatrix op, SubsystemDims dims, bool subnormalized = false);

  const ComplexMatrix& matrix() const { return op_; }
  const SubsystemDims& dims() const { return dims_; }
  bool subnormalized() const { return subnormalized_; }
  int dim() const { return static_cast<int>(op_.rows()); }
  double trace() const { return op_.trace().real(); }

  /// Same operator with new labels (dims must agree party by party).
  DensityOperator relabeled(const SubsystemDims& dims) const;

 private:
  struct NoCheck {};
  DensityOperator(ComplexMatrix op, SubsystemDims dims, bool subnormalized, NoCheck);

  ComplexMatrix op_;
  SubsystemDims dims_;
  bool subnormalized_ = false;
};

class PureState {
 public:
  PureState(ComplexVector vec, SubsystemDims dims);

  const ComplexVector& vector() const { return vec_; }
  const SubsystemDims& dims() const { return dims_; }
  DensityOperator projector() const;

 private:
  ComplexVector vec_;
  SubsystemDims dims_;
};

struct EigenSystem {
  RealVector values;     // descending
  ComplexMatrix vectors;  // columns match values
};

enum class MatrixFunction { sqrt, log2, exp2 };

double hermiticity_error(const ComplexMatrix& m);
ComplexMatrix hermitian_part(const ComplexMatrix& m);

EigenSystem hermitian_eig(const ComplexMatrix& m);
ComplexMatrix matrix_fn(const ComplexMatrix& m, MatrixFunction fn, bool on_support = true);
double min_eigenvalue(const ComplexMatrix& m);
double max_eigenvalue(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b);
/// n-fold tensor power with labels suffixed ".1", ..., ".n".
DensityOperator tensor_power(const DensityOperator& s, int n);

DensityOperator partial_trace(const DensityOperator& s, const Labels& keep);
ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemDims& dims, const Labels& keep);

ComplexMatrix partial_transpose(const DensityOperator& s, const std::string& party);
ComplexMatrix partial_transpose(const ComplexMatrix& m, const SubsystemDims& dims, const Labels& parties);

/// Reorders the tensor factors so that the result's parties follow `order`.
DensityOperator permute(const DensityOperator& s, const Labels& order);
ComplexMatrix permute(const ComplexMatrix& m, const SubsystemDims& dims, const Labels& order);

/// (U ⊗ I) m (U ⊗ I)† with U acting on `on` (in the listed order).
ComplexMatrix conjugate_local(const ComplexMatrix& m, const SubsystemDims& dims,
                              const ComplexMatrix& u, const Labels& on);
DensityOperator conjugate_local(const DensityOperator& s, const ComplexMatrix& u, const Labels& on);

/// Embeds `op` acting on `on` into the full space as op ⊗ I (factor-ordered).
ComplexMatrix embed_operator(const ComplexMatrix& op, const Labels& on, const SubsystemDims& dims);

/// Generalized Uhlmann fidelity; includes the √((1−Tr a)(1−Tr b)) term.
double fidelity(const DensityOperator& a, const DensityOperator& b);
double fidelity(const ComplexMatrix& a, const ComplexMatrix& b);
double purified_distance(const DensityOperator& a, const DensityOperator& b);

bool is_unitary(const ComplexMatrix& u, double tol = 1e-10);

}  // namespace disent
