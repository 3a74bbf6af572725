#include "disent/states.hpp"

#include <cmath>
#include <sstream>

#include "disent/state_io.hpp"

namespace disent {

Labels default_labels(int k) {
  Labels out;
  for (int i = 0; i < k; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
  return out;
}

DensityOperator bell_state() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return PureState(v, SubsystemDims({"A", "B"}, {2, 2})).projector();
}

namespace {

ComplexMatrix swap_operator(int d) {
  ComplexMatrix f = ComplexMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f(i * d + j, j * d + i) = 1.0;
  return f;
}

void require_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::BadParameter, std::string(name) + " must lie in [0,1]");
}

}  // namespace

DensityOperator werner_state(double p, int d) {
  require_unit_interval(p, "werner parameter");
  if (d < 2) throw Error(ErrorCode::BadParameter, "werner dimension must be >= 2");
  const ComplexMatrix id = ComplexMatrix::Identity(d * d, d * d);
  const ComplexMatrix f = swap_operator(d);
  const ComplexMatrix anti = 0.5 * (id - f);
  const ComplexMatrix sym = 0.5 * (id + f);
  const double da = d * (d - 1) / 2.0, ds = d * (d + 1) / 2.0;
  return DensityOperator(p * anti / da + (1.0 - p) * sym / ds, SubsystemDims({"A", "B"}, {d, d}));
}

DensityOperator isotropic_state(double f, int d) {
  require_unit_interval(f, "isotropic fidelity");
  if (d < 2) throw Error(ErrorCode::BadParameter, "isotropic dimension must be >= 2");
  ComplexVector phi = ComplexVector::Zero(d * d);
  for (int i = 0; i < d; ++i) phi(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  const ComplexMatrix proj = phi * phi.adjoint();
  const ComplexMatrix id = ComplexMatrix::Identity(d * d, d * d);
  return DensityOperator(f * proj + (1.0 - f) * (id - proj) / (d * d - 1.0), SubsystemDims({"A", "B"}, {d, d}));
}

DensityOperator ghz_state(int k) {
  if (k < 2) throw Error(ErrorCode::BadParameter, "ghz needs k >= 2");
  if (k > 12) throw Error(ErrorCode::DimensionBlowup, "ghz dimension 2^" + std::to_string(k));
  const int n = 1 << k;
  ComplexVector v = ComplexVector::Zero(n);
  v(0) = v(n - 1) = 1.0 / std::sqrt(2.0);
  return PureState(v, SubsystemDims(default_labels(k), std::vector<int>(k, 2))).projector();
}

DensityOperator maxcorr_state(int m, const std::string& a, const std::string& b) {
  if (m < 1) throw Error(ErrorCode::BadParameter, "maxcorr needs M >= 1");
  if (m > 64) throw Error(ErrorCode::DimensionBlowup, "maxcorr dimension " + std::to_string(m * m));
  ComplexMatrix op = ComplexMatrix::Zero(m * m, m * m);
  for (int i = 0; i < m; ++i) op(i * m + i, i * m + i) = 1.0 / m;
  return DensityOperator::trusted(std::move(op), SubsystemDims({a, b}, {m, m}));
}

ComplexVector random_unit_vector(Rng& rng, int d) {
  std::normal_distribution<double> normal;
  ComplexVector v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(normal(rng), normal(rng));
  return v / v.norm();
}

ComplexMatrix random_unitary(Rng& rng, int d) {
  std::normal_distribution<double> normal;
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(normal(rng), normal(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Phase fix makes the distribution Haar.
  for (int j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    if (std::abs(rjj) > 0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

DensityOperator random_state(Rng& rng, const SubsystemDims& dims, int rank) {
  const int d = dims.total();
  if (rank < 1 || rank > d) throw Error(ErrorCode::BadParameter, "rank must lie in [1, dim]");
  std::normal_distribution<double> normal;
  ComplexMatrix g(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = cplx(normal(rng), normal(rng));
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityOperator::trusted(hermitian_part(rho), dims);
}

DensityOperator random_state(std::uint64_t seed, const SubsystemDims& dims, int rank) {
  Rng rng(seed);
  return random_state(rng, dims, rank);
}

DensityOperator maximally_mixed(const SubsystemDims& dims) {
  const int d = dims.total();
  return DensityOperator::trusted(ComplexMatrix::Identity(d, d) / static_cast<double>(d), dims);
}

DensityOperator random_markov_state(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.2, 0.8);
  const double p0 = unif(rng);
  const SubsystemDims qubit({"X"}, {2});
  ComplexMatrix op = ComplexMatrix::Zero(8, 8);
  const ComplexMatrix u = random_unitary(rng, 2);
  for (int c = 0; c < 2; ++c) {
    const auto ra = random_state(rng, qubit, 2).matrix();
    const auto rb = random_state(rng, qubit, 2).matrix();
    const ComplexVector cv = u.col(c);
    const ComplexMatrix rc = cv * cv.adjoint();
    op += (c == 0 ? p0 : 1.0 - p0) * kron(kron(ra, rb), rc);
  }
  return DensityOperator::trusted(hermitian_part(op), SubsystemDims({"A", "B", "C"}, {2, 2, 2}));
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadParameter, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::BadParameter, "not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw Error(ErrorCode::BadParameter, "not an integer: '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

DensityOperator parse_state_spec(const std::string& spec) {
  if (spec.rfind("file:", 0) == 0) return read_state_file(spec.substr(5));
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const auto params = colon == std::string::npos ? std::vector<std::string>{} : split(spec.substr(colon + 1), ',');
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (params.size() < lo || params.size() > hi)
      throw Error(ErrorCode::BadParameter, "wrong number of parameters for '" + family + "'");
  };
  if (family == "bell") {
    need(0, 0);
    return bell_state();
  }
  if (family == "werner") {
    need(1, 2);
    return werner_state(to_double(params[0]), params.size() > 1 ? to_int(params[1]) : 2);
  }
  if (family == "isotropic") {
    need(1, 2);
    return isotropic_state(to_double(params[0]), params.size() > 1 ? to_int(params[1]) : 2);
  }
  if (family == "ghz" || family == "ghz3") {
    if (family == "ghz3") return ghz_state(3);
    need(1, 1);
    return ghz_state(to_int(params[0]));
  }
  if (family == "maxcorr") {
    need(1, 1);
    return maxcorr_state(to_int(params[0]));
  }
  if (family == "mixed") {
    need(2, 2);
    return maximally_mixed(SubsystemDims({"A", "B"}, {to_int(params[0]), to_int(params[1])}));
  }
  if (family == "random") {
    need(1, 4);
    const auto seed = static_cast<std::uint64_t>(to_int(params[0]));
    const int da = params.size() > 1 ? to_int(params[1]) : 2;
    const int db = params.size() > 2 ? to_int(params[2]) : 2;
    const int rank = params.size() > 3 ? to_int(params[3]) : da * db;
    return random_state(seed, SubsystemDims({"A", "B"}, {da, db}), rank);
  }
  if (family == "markov") {
    need(1, 1);
    Rng rng(static_cast<std::uint64_t>(to_int(params[0])));
    return random_markov_state(rng);
  }
  if (family == "random3") {
    need(1, 2);
    const auto seed = static_cast<std::uint64_t>(to_int(params[0]));
    return random_state(seed, SubsystemDims({"A", "B", "C"}, {2, 2, 2}), params.size() > 1 ? to_int(params[1]) : 8);
  }
  throw Error(ErrorCode::BadParameter, "unknown state family '" + family + "'");
}

}  // namespace disent
