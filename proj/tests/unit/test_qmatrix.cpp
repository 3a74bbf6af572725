#include <doctest.h>

#include <cmath>

#include "disent/qmatrix.hpp"
#include "disent/states.hpp"

using namespace disent;

namespace {

// Index-loop partial trace over the second of two factors.
ComplexMatrix trace_second(const ComplexMatrix& m, int da, int db) {
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
  return out;
}

ComplexMatrix trace_first(const ComplexMatrix& m, int da, int db) {
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (int i = 0; i < db; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
  return out;
}

// Swaps the two factors of |i⟩|k⟩ by explicit index arithmetic.
ComplexMatrix swap_factors(const ComplexMatrix& m, int da, int db) {
  ComplexMatrix out(m.rows(), m.cols());
  for (int i = 0; i < da; ++i)
    for (int k = 0; k < db; ++k)
      for (int j = 0; j < da; ++j)
        for (int l = 0; l < db; ++l) out(k * da + i, l * da + j) = m(i * db + k, j * db + l);
  return out;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("partial trace matches the index-loop reference on a 2x3 state") {
  const DensityOperator rho = random_state(7, SubsystemDims({"A", "B"}, {2, 3}), 6);
  CHECK(max_abs(partial_trace(rho, {"A"}).matrix() - trace_second(rho.matrix(), 2, 3)) < 1e-14);
  CHECK(max_abs(partial_trace(rho, {"B"}).matrix() - trace_first(rho.matrix(), 2, 3)) < 1e-14);
}

TEST_CASE("Bell marginals are maximally mixed and the partial transpose has eigenvalue -1/2") {
  const DensityOperator bell = bell_state();
  CHECK(max_abs(partial_trace(bell, {"A"}).matrix() - ComplexMatrix::Identity(2, 2) / 2.0) < 1e-15);
  CHECK(min_eigenvalue(partial_transpose(bell, "B")) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("permute agrees with explicit factor swap") {
  const DensityOperator rho = random_state(3, SubsystemDims({"A", "B"}, {2, 3}), 4);
  const DensityOperator swapped = permute(rho, {"B", "A"});
  CHECK(swapped.dims().labels() == Labels{"B", "A"});
  CHECK(max_abs(swapped.matrix() - swap_factors(rho.matrix(), 2, 3)) < 1e-15);
}

TEST_CASE("tensor power suffixes labels and multiplies traces") {
  const DensityOperator q = random_state(1, SubsystemDims({"A"}, {2}), 2);
  const DensityOperator p = tensor_power(q, 3);
  CHECK(p.dims().labels() == Labels{"A.1", "A.2", "A.3"});
  CHECK(p.dim() == 8);
  CHECK(max_abs(p.matrix() - kron(kron(q.matrix(), q.matrix()), q.matrix())) < 1e-15);
}

TEST_CASE("fidelity of pure states is the overlap modulus") {
  Rng rng(11);
  const SubsystemDims dims({"A"}, {3});
  for (int t = 0; t < 10; ++t) {
    const ComplexVector u = random_unit_vector(rng, 3);
    const ComplexVector v = random_unit_vector(rng, 3);
    const DensityOperator a = PureState(u, dims).projector();
    const DensityOperator b = PureState(v, dims).projector();
    const double overlap = std::abs(u.dot(v));
    CHECK(fidelity(a, b) == doctest::Approx(overlap).epsilon(1e-9));
    CHECK(purified_distance(a, b) == doctest::Approx(std::sqrt(1 - overlap * overlap)).epsilon(1e-7));
  }
}

TEST_CASE("fidelity of commuting states is the classical overlap") {
  const SubsystemDims dims({"A"}, {3});
  ComplexMatrix a = ComplexMatrix::Zero(3, 3), b = ComplexMatrix::Zero(3, 3);
  const double p[] = {0.5, 0.3, 0.2}, q[] = {0.1, 0.6, 0.3};
  double f = 0;
  for (int i = 0; i < 3; ++i) {
    a(i, i) = p[i];
    b(i, i) = q[i];
    f += std::sqrt(p[i] * q[i]);
  }
  CHECK(fidelity(DensityOperator(a, dims), DensityOperator(b, dims)) == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("purified distance includes the trace deficit for subnormalized operands") {
  const SubsystemDims dims({"A"}, {2});
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 0) = 0.81;
  const DensityOperator sub(a, dims, true);
  ComplexMatrix b = ComplexMatrix::Zero(2, 2);
  b(0, 0) = 1;
  // F = 0.9 + 0 for the normalized projector; P = √(1 − 0.81).
  CHECK(fidelity(sub, DensityOperator(b, dims)) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(purified_distance(sub, DensityOperator(b, dims)) == doctest::Approx(std::sqrt(0.19)).epsilon(1e-12));
}

TEST_CASE("purified distance is symmetric and vanishes on the diagonal") {
  const SubsystemDims dims({"A", "B"}, {2, 2});
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DensityOperator a = random_state(s, dims, 3), b = random_state(s + 100, dims, 4);
    CHECK(purified_distance(a, a) < 1e-12);
    CHECK(std::abs(purified_distance(a, b) - purified_distance(b, a)) < 1e-10);
  }
}

TEST_CASE("local conjugation by a unitary preserves the spectrum") {
  Rng rng(5);
  const DensityOperator rho = random_state(rng, SubsystemDims({"A", "B"}, {2, 2}), 4);
  const ComplexMatrix u = random_unitary(rng, 2);
  const DensityOperator out = conjugate_local(rho, u, {"B"});
  const auto e1 = hermitian_eig(rho.matrix()).values, e2 = hermitian_eig(out.matrix()).values;
  CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_abs(out.matrix() - kron(ComplexMatrix::Identity(2, 2), u) * rho.matrix() *
                                   kron(ComplexMatrix::Identity(2, 2), u).adjoint()) < 1e-14);
}

TEST_CASE("invalid operators are rejected with a code") {
  const SubsystemDims dims({"A"}, {2});
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityOperator(m, dims), Error);
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::Identity(3, 3) / 3.0, dims), Error);
  ComplexMatrix nh = ComplexMatrix::Identity(2, 2) / 2.0;
  nh(0, 1) = 0.1;
  try {
    DensityOperator bad(nh, dims);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHermitian);
  }
}

TEST_CASE("unknown labels raise UnknownLabel") {
  try {
    partial_trace(bell_state(), {"Z"});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
  }
}
