#include "disent/qmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace disent {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::Subnormalized: return "Subnormalized";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::InfeasibleSupport: return "InfeasibleSupport";
    case ErrorCode::DimensionBlowup: return "DimensionBlowup";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::SingularConditioner: return "SingularConditioner";
    case ErrorCode::InvalidFile: return "InvalidFile";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// SubsystemDims

SubsystemDims::SubsystemDims(std::vector<Party> parties) : parties_(std::move(parties)) {
  std::set<std::string> seen;
  for (const auto& p : parties_) {
    if (p.dim < 1) throw Error(ErrorCode::BadParameter, "local dimension of '" + p.label + "' must be positive");
    if (p.label.empty()) throw Error(ErrorCode::BadParameter, "empty party label");
    if (!seen.insert(p.label).second) throw Error(ErrorCode::BadParameter, "duplicate party label '" + p.label + "'");
  }
}

SubsystemDims::SubsystemDims(const Labels& labels, const std::vector<int>& dims) {
  if (labels.size() != dims.size()) throw Error(ErrorCode::BadParameter, "labels and dims differ in length");
  std::vector<Party> parties;
  for (std::size_t i = 0; i < labels.size(); ++i) parties.push_back({labels[i], dims[i]});
  *this = SubsystemDims(std::move(parties));
}

int SubsystemDims::total() const {
  int t = 1;
  for (const auto& p : parties_) t *= p.dim;
  return t;
}

Labels SubsystemDims::labels() const {
  Labels out;
  for (const auto& p : parties_) out.push_back(p.label);
  return out;
}

std::vector<int> SubsystemDims::dims() const {
  std::vector<int> out;
  for (const auto& p : parties_) out.push_back(p.dim);
  return out;
}

bool SubsystemDims::contains(const std::string& label) const {
  return std::any_of(parties_.begin(), parties_.end(), [&](const Party& p) { return p.label == label; });
}

std::size_t SubsystemDims::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < parties_.size(); ++i)
    if (parties_[i].label == label) return i;
  throw Error(ErrorCode::UnknownLabel, "no party labelled '" + label + "'");
}

int SubsystemDims::dim_of(const std::string& label) const { return parties_[index_of(label)].dim; }

int SubsystemDims::dim_of(const Labels& labels) const {
  int d = 1;
  for (const auto& l : labels) d *= dim_of(l);
  return d;
}

SubsystemDims SubsystemDims::concat(const SubsystemDims& other) const {
  auto all = parties_;
  all.insert(all.end(), other.parties_.begin(), other.parties_.end());
  return SubsystemDims(std::move(all));
}

SubsystemDims SubsystemDims::select(const Labels& keep) const {
  for (const auto& l : keep) (void)index_of(l);
  std::vector<Party> out;
  for (const auto& p : parties_)
    if (std::find(keep.begin(), keep.end(), p.label) != keep.end()) out.push_back(p);
  return SubsystemDims(std::move(out));
}

SubsystemDims SubsystemDims::reorder(const Labels& order) const {
  if (order.size() != parties_.size())
    throw Error(ErrorCode::BadPartition, "reorder must list every party exactly once");
  std::vector<Party> out;
  for (const auto& l : order) out.push_back(parties_[index_of(l)]);
  return SubsystemDims(std::move(out));
}

SubsystemDims SubsystemDims::suffixed(const std::string& suffix) const {
  auto out = parties_;
  for (auto& p : out) p.label += suffix;
  return SubsystemDims(std::move(out));
}

// ---------------------------------------------------------------------------
// spectral helpers

double hermiticity_error(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

namespace {

void require_hermitian(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotHermitian, "matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermiticity_error(m) > kTolHerm * scale)
    throw Error(ErrorCode::NotHermitian, "max |m - m^dagger| = " + std::to_string(hermiticity_error(m)));
}

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  return true;
}

}  // namespace

EigenSystem hermitian_eig(const ComplexMatrix& m) {
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "eigensolver did not converge");
  const Eigen::Index n = m.rows();
  EigenSystem out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

double min_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double max_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(m.rows() - 1);
}

ComplexMatrix matrix_fn(const ComplexMatrix& m, MatrixFunction fn, bool on_support) {
  const auto eig = hermitian_eig(m);
  RealVector f(eig.values.size());
  // Eigenvalues at rounding level are zero; their square roots would not be.
  const double rank_floor = eig.values.size() > 0 ? static_cast<double>(eig.values.size()) *
                                                        std::numeric_limits<double>::epsilon() *
                                                        eig.values.cwiseAbs().maxCoeff()
                                                  : 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    double v = eig.values(i);
    switch (fn) {
      case MatrixFunction::sqrt:
        if (v < -kTolPsd) throw Error(ErrorCode::NegativeEigenvalue, "sqrt of eigenvalue " + std::to_string(v));
        f(i) = v > rank_floor ? std::sqrt(v) : 0.0;
        break;
      case MatrixFunction::log2:
        if (v < -kTolPsd) throw Error(ErrorCode::NegativeEigenvalue, "log of eigenvalue " + std::to_string(v));
        if (v <= kTolPsd) {
          if (!on_support) throw Error(ErrorCode::InfeasibleSupport, "log of a singular matrix off support");
          f(i) = 0.0;
        } else {
          f(i) = std::log2(v);
        }
        break;
      case MatrixFunction::exp2:
        f(i) = std::exp2(v);
        break;
    }
  }
  return eig.vectors * f.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_unitary(const ComplexMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return (u * u.adjoint() - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(ComplexMatrix op, SubsystemDims dims, bool subnormalized, NoCheck)
    : op_(std::move(op)), dims_(std::move(dims)), subnormalized_(subnormalized) {
  if (op_.rows() != op_.cols()) throw Error(ErrorCode::DimMismatch, "density operator must be square");
  if (dims_.total() != op_.rows())
    throw Error(ErrorCode::DimMismatch, "subsystem dims multiply to " + std::to_string(dims_.total()) +
                                            " but operator has dimension " + std::to_string(op_.rows()));
  if (!all_finite(op_)) throw Error(ErrorCode::InvalidState, "non-finite entries");
  require_hermitian(op_);
  op_ = hermitian_part(op_);
  const double tr = op_.trace().real();
  if (!subnormalized_ && std::abs(tr - 1.0) > kTolTrace)
    throw Error(ErrorCode::InvalidState, "trace " + std::to_string(tr) + " != 1");
  if (subnormalized_ && tr > 1.0 + kTolTrace)
    throw Error(ErrorCode::InvalidState, "subnormalized trace " + std::to_string(tr) + " > 1");
}

DensityOperator::DensityOperator(ComplexMatrix op, SubsystemDims dims, bool subnormalized)
    : DensityOperator(std::move(op), std::move(dims), subnormalized, NoCheck{}) {
  const double lo = min_eigenvalue(op_);
  if (lo < -kTolPsd) throw Error(ErrorCode::NegativeEigenvalue, "min eigenvalue " + std::to_string(lo));
}

DensityOperator DensityOperator::repaired(ComplexMatrix op, SubsystemDims dims, bool subnormalized) {
  if (op.rows() != op.cols() || dims.total() != op.rows())
    throw Error(ErrorCode::DimMismatch, "operator does not match its subsystem dims");
  require_hermitian(op);
  const auto eig = hermitian_eig(hermitian_part(op));
  if (eig.values.minCoeff() < -kTolPsd)
    throw Error(ErrorCode::NegativeEigenvalue, "min eigenvalue " + std::to_string(eig.values.minCoeff()));
  RealVector clipped = eig.values.cwiseMax(0.0);
  // Subnormalized operators are only scaled down, never up.
  if (!subnormalized || clipped.sum() > 1.0) clipped /= clipped.sum();
  return DensityOperator(hermitian_part(eig.vectors * clipped.cast<cplx>().asDiagonal() * eig.vectors.adjoint()),
                         std::move(dims), subnormalized, NoCheck{});
}

DensityOperator DensityOperator::trusted(ComplexMatrix op, SubsystemDims dims, bool subnormalized) {
  return DensityOperator(std::move(op), std::move(dims), subnormalized, NoCheck{});
}

DensityOperator DensityOperator::relabeled(const SubsystemDims& dims) const {
  if (dims.dims() != dims_.dims()) throw Error(ErrorCode::DimMismatch, "relabel must keep local dimensions");
  DensityOperator out = *this;
  out.dims_ = dims;
  return out;
}

PureState::PureState(ComplexVector vec, SubsystemDims dims) : vec_(std::move(vec)), dims_(std::move(dims)) {
  if (dims_.total() != vec_.size()) throw Error(ErrorCode::DimMismatch, "vector length does not match dims");
  if (std::abs(vec_.norm() - 1.0) > kTolNorm)
    throw Error(ErrorCode::InvalidState, "pure state norm " + std::to_string(vec_.norm()) + " != 1");
}

DensityOperator PureState::projector() const {
  return DensityOperator::trusted(vec_ * vec_.adjoint(), dims_);
}

// ---------------------------------------------------------------------------
// index bookkeeping

namespace {

/// Mixed-radix digits of a flat index, most significant party first.
struct Radix {
  std::vector<int> dims;
  std::vector<int> strides;

  explicit Radix(std::vector<int> d) : dims(std::move(d)), strides(dims.size(), 1) {
    for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) strides[i] = strides[i + 1] * dims[i + 1];
  }
  int digit(int index, std::size_t pos) const { return (index / strides[pos]) % dims[pos]; }
};

std::vector<std::size_t> positions_of(const SubsystemDims& dims, const Labels& labels) {
  std::vector<std::size_t> pos;
  for (const auto& l : labels) pos.push_back(dims.index_of(l));
  return pos;
}

/// Flat index in the reordered space -> flat index in the original space.
std::vector<int> permutation_map(const SubsystemDims& dims, const Labels& order) {
  const auto reordered = dims.reorder(order);
  const auto pos = positions_of(dims, order);
  Radix from(dims.dims());
  Radix to(reordered.dims());
  const int total = dims.total();
  std::vector<int> map(total);
  for (int n = 0; n < total; ++n) {
    int old = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) old += to.digit(n, k) * from.strides[pos[k]];
    map[n] = old;
  }
  return map;
}

void require_dims(const ComplexMatrix& m, const SubsystemDims& dims) {
  if (m.rows() != dims.total() || m.cols() != dims.total())
    throw Error(ErrorCode::DimMismatch, "matrix dimension does not match subsystem dims");
}

}  // namespace

DensityOperator tensor_product(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator::trusted(kron(a.matrix(), b.matrix()), a.dims().concat(b.dims()),
                                  a.subnormalized() || b.subnormalized());
}

DensityOperator tensor_power(const DensityOperator& s, int n) {
  if (n < 1) throw Error(ErrorCode::BadParameter, "tensor power needs n >= 1");
  ComplexMatrix op = s.matrix();
  SubsystemDims dims = s.dims().suffixed(".1");
  for (int k = 2; k <= n; ++k) {
    op = kron(op, s.matrix());
    dims = dims.concat(s.dims().suffixed("." + std::to_string(k)));
  }
  return DensityOperator::trusted(std::move(op), std::move(dims), s.subnormalized());
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemDims& dims, const Labels& keep) {
  require_dims(m, dims);
  const auto kept = dims.select(keep);
  Labels traced;
  for (const auto& l : dims.labels())
    if (!kept.contains(l)) traced.push_back(l);
  Labels order = kept.labels();
  order.insert(order.end(), traced.begin(), traced.end());
  const auto map = permutation_map(dims, order);
  const int dk = kept.total();
  const int dt = dims.total() / dk;
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j) {
      cplx acc = 0;
      for (int t = 0; t < dt; ++t) acc += m(map[i * dt + t], map[j * dt + t]);
      out(i, j) = acc;
    }
  return out;
}

DensityOperator partial_trace(const DensityOperator& s, const Labels& keep) {
  auto kept = s.dims().select(keep);
  return DensityOperator::trusted(partial_trace(s.matrix(), s.dims(), keep), std::move(kept), s.subnormalized());
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const SubsystemDims& dims, const Labels& parties) {
  require_dims(m, dims);
  const auto pos = positions_of(dims, parties);
  Radix radix(dims.dims());
  const int n = dims.total();
  ComplexMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int ii = i, jj = j;
      for (auto p : pos) {
        const int di = radix.digit(i, p), dj = radix.digit(j, p);
        ii += (dj - di) * radix.strides[p];
        jj += (di - dj) * radix.strides[p];
      }
      out(ii, jj) = m(i, j);
    }
  return out;
}

ComplexMatrix partial_transpose(const DensityOperator& s, const std::string& party) {
  return partial_transpose(s.matrix(), s.dims(), {party});
}

ComplexMatrix permute(const ComplexMatrix& m, const SubsystemDims& dims, const Labels& order) {
  require_dims(m, dims);
  const auto map = permutation_map(dims, order);
  const int n = dims.total();
  ComplexMatrix out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = m(map[i], map[j]);
  return out;
}

DensityOperator permute(const DensityOperator& s, const Labels& order) {
  return DensityOperator::trusted(permute(s.matrix(), s.dims(), order), s.dims().reorder(order), s.subnormalized());
}

namespace {

Labels with_front(const SubsystemDims& dims, const Labels& front) {
  Labels order = front;
  for (const auto& l : dims.labels())
    if (std::find(front.begin(), front.end(), l) == front.end()) order.push_back(l);
  return order;
}

/// Left-multiplies by (U ⊗ I) in place, U acting on the leading factor.
void left_multiply_leading(ComplexMatrix& x, const ComplexMatrix& u) {
  const Eigen::Index n = x.rows();
  const Eigen::Index da = u.rows();
  const Eigen::Index dr = n / da;
  Eigen::Map<ComplexMatrix> view(x.data(), dr, da * x.cols());
  const ComplexMatrix ut = u.transpose();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    ComplexMatrix blk = view.middleCols(c * da, da) * ut;
    view.middleCols(c * da, da) = blk;
  }
}

}  // namespace

ComplexMatrix conjugate_local(const ComplexMatrix& m, const SubsystemDims& dims, const ComplexMatrix& u,
                              const Labels& on) {
  require_dims(m, dims);
  if (u.rows() != dims.dim_of(on) || u.cols() != u.rows())
    throw Error(ErrorCode::DimMismatch, "local operator does not match the dimension of its registers");
  const Labels order = with_front(dims, on);
  const auto reordered = dims.reorder(order);
  ComplexMatrix x = permute(m, dims, order);
  left_multiply_leading(x, u);
  ComplexMatrix y = x.adjoint();
  left_multiply_leading(y, u);
  x = y.adjoint();
  return permute(x, reordered, dims.labels());
}

DensityOperator conjugate_local(const DensityOperator& s, const ComplexMatrix& u, const Labels& on) {
  return DensityOperator::trusted(conjugate_local(s.matrix(), s.dims(), u, on), s.dims(), s.subnormalized());
}

ComplexMatrix embed_operator(const ComplexMatrix& op, const Labels& on, const SubsystemDims& dims) {
  const Labels order = with_front(dims, on);
  const auto reordered = dims.reorder(order);
  const int rest = dims.total() / dims.dim_of(on);
  if (op.rows() != dims.dim_of(on)) throw Error(ErrorCode::DimMismatch, "operator does not match registers");
  ComplexMatrix full = kron(op, ComplexMatrix::Identity(rest, rest));
  return permute(full, reordered, dims.labels());
}

// ---------------------------------------------------------------------------
// fidelity

double fidelity(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimMismatch, "fidelity operands differ in size");
  // ‖√a √b‖₁ from singular values, avoiding square roots of tiny eigenvalues.
  const ComplexMatrix sa = matrix_fn(a, MatrixFunction::sqrt);
  const ComplexMatrix sb = matrix_fn(b, MatrixFunction::sqrt);
  double f = Eigen::JacobiSVD<ComplexMatrix>(sa * sb).singularValues().sum();
  const double ta = a.trace().real(), tb = b.trace().real();
  f += std::sqrt(std::max(0.0, 1.0 - ta) * std::max(0.0, 1.0 - tb));
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityOperator& a, const DensityOperator& b) {
  if (a.dims().total() != b.dims().total()) throw Error(ErrorCode::DimMismatch, "fidelity operands differ in dimension");
  return fidelity(a.matrix(), b.matrix());
}

double purified_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.dims().total() != b.dims().total()) throw Error(ErrorCode::DimMismatch, "distance operands differ in dimension");
  // 1 − F̄ = ½‖√a − √b U‖² + ½(√(1−Tr a) − √(1−Tr b))² with U the polar
  // factor of √a√b; a sum of squares, so it survives F̄ → 1 without the
  // cancellation in 1 − F̄².
  const ComplexMatrix sa = matrix_fn(a.matrix(), MatrixFunction::sqrt);
  const ComplexMatrix sb = matrix_fn(b.matrix(), MatrixFunction::sqrt);
  Eigen::JacobiSVD<ComplexMatrix> svd(sa * sb, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexMatrix u = svd.matrixV() * svd.matrixU().adjoint();
  const double bures = (sa - sb * u).squaredNorm();
  // Normalized operands carry no deficit; rounding in their trace would
  // otherwise enter at square-root size.
  const double ta = a.subnormalized() ? std::sqrt(std::max(0.0, 1.0 - a.trace())) : 0.0;
  const double tb = b.subnormalized() ? std::sqrt(std::max(0.0, 1.0 - b.trace())) : 0.0;
  const double gap = std::clamp(0.5 * bures + 0.5 * (ta - tb) * (ta - tb), 0.0, 1.0);
  return std::sqrt(gap * (2.0 - gap));
}

}  // namespace disent
