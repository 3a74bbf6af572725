#include <doctest.h>

#include <cmath>

#include "disent/convexsplit.hpp"
#include "disent/divergences.hpp"
#include "disent/states.hpp"

using namespace disent;

namespace {

DensityOperator qubit_diag(double p0) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = p0;
  m(1, 1) = 1 - p0;
  return DensityOperator(m, SubsystemDims({"A"}, {2}));
}

// |0⟩⟨0| against I/2: τ is diagonal with weight on strings by their number k
// of zeros; τ(x) = k / (N 2^{N−1}), σ^{⊗N}(x) = 2^{−N}.
double zero_vs_mixed_distance(int n) {
  double f = 0;
  for (int k = 0; k <= n; ++k) {
    const double count = std::tgamma(n + 1) / (std::tgamma(k + 1) * std::tgamma(n - k + 1));
    f += count * std::sqrt(k / (n * std::pow(2.0, n - 1)) * std::pow(2.0, -n));
  }
  return std::sqrt(1 - f * f);
}

}  // namespace

TEST_CASE("convex split distance matches the classical binomial oracle") {
  for (int n = 1; n <= 6; ++n) {
    const SplitDistance d = convex_split_distance(qubit_diag(1), qubit_diag(0.5), n);
    CHECK(d.commuting_path);
    CHECK(d.distance == doctest::Approx(zero_vs_mixed_distance(n)).epsilon(1e-7));
  }
  CHECK(zero_vs_mixed_distance(1) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("dense and commuting evaluations agree") {
  const DensityOperator rho = random_state(3, SubsystemDims({"A"}, {2}), 2);
  const DensityOperator sigma = maximally_mixed(SubsystemDims({"A"}, {2}));
  const ConvexSplitSpec spec{rho, sigma, 3, 0, 1};
  const DensityOperator tau = build_convex_split(spec);
  CHECK(tau.dim() == 8);
  CHECK(tau.trace() == doctest::Approx(1.0));
  const double dense = purified_distance(tau, tensor_power(sigma, 3));
  CHECK(convex_split_distance(spec).distance == doctest::Approx(dense).epsilon(1e-7));
}

TEST_CASE("non-commuting pairs are evaluated densely") {
  const SubsystemDims dims({"A"}, {2});
  const DensityOperator rho = random_state(1, dims, 2), sigma = random_state(2, dims, 2);
  REQUIRE_FALSE(commute(rho.matrix(), sigma.matrix()));
  const SplitDistance d = convex_split_distance(rho, sigma, 3);
  CHECK_FALSE(d.commuting_path);
  CHECK(d.distance == doctest::Approx(purified_distance(build_convex_split({rho, sigma, 3, 0, 1}),
                                                        tensor_power(sigma, 3))).epsilon(1e-8));
}

TEST_CASE("register count is the ceiling of 2^D_max / xi") {
  const RegisterCount r = registers_for(qubit_diag(1), qubit_diag(0.5), 0, 0.5);
  CHECK(r.dmax_bits == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.N == 4);
  CHECK(registers_for(qubit_diag(0.5), qubit_diag(0.5), 0, 0.3).N == 4);
}

TEST_CASE("support violations and blowups are refused") {
  CHECK_THROWS_AS(registers_for(qubit_diag(0.5), qubit_diag(1), 0, 0.5), Error);
  const SubsystemDims dims({"A", "B"}, {2, 2});
  const DensityOperator rho = random_state(1, dims, 4), sigma = random_state(2, dims, 4);
  try {
    convex_split_distance(rho, sigma, 7);
    FAIL("expected DimensionBlowup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionBlowup);
  }
}

TEST_CASE("lemma row on a fixed instance meets its bound and sweeps monotonically") {
  const LemmaInstance inst{"zero", "mixed", qubit_diag(1), qubit_diag(0.5), 0, 0.5};
  const LemmaRow row = verify_lemma_row(inst);
  CHECK(row.error.empty());
  CHECK(row.N == 4);
  CHECK(row.measured_P == doctest::Approx(zero_vs_mixed_distance(4)).epsilon(1e-7));
  CHECK(row.pass);
  CHECK(row.monotone);
  CHECK(row.sweep.size() == 4);
}

TEST_CASE("default lemma grid has at least twenty supported two-qubit instances") {
  const auto grid = default_lemma_grid();
  CHECK(grid.size() >= 20);
  for (const auto& g : grid) {
    CHECK(g.rho.dim() == 4);
    CHECK(d_max(g.rho, g.sigma).finite());
  }
}
