#include <doctest.h>

#include <cmath>

#include "disent/divergences.hpp"
#include "disent/states.hpp"

using namespace disent;

namespace {

DensityOperator diagonal(const std::vector<double>& p) {
  ComplexMatrix m = ComplexMatrix::Zero(p.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m(i, i) = p[i];
  return DensityOperator(m, SubsystemDims({"A"}, {static_cast<int>(p.size())}));
}

double kl_bits(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * std::log2(p[i] / q[i]);
  return s;
}

double shannon_bits(const std::vector<double>& p) {
  double s = 0;
  for (double x : p)
    if (x > 0) s -= x * std::log2(x);
  return s;
}

}  // namespace

TEST_CASE("relative entropy of commuting states is the classical divergence") {
  const std::vector<double> p = {0.5, 0.25, 0.25}, q = {0.2, 0.3, 0.5};
  CHECK(relative_entropy(diagonal(p), diagonal(q)).bits == doctest::Approx(kl_bits(p, q)).epsilon(1e-12));
  CHECK(von_neumann_entropy(diagonal(p)) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("relative entropy is infinite off the support") {
  const DivergenceValue v = relative_entropy(diagonal({0.5, 0.5}), diagonal({1.0, 0.0}));
  CHECK_FALSE(v.finite());
}

TEST_CASE("d_max of commuting states is the log of the largest ratio") {
  const std::vector<double> p = {0.5, 0.25, 0.25}, q = {0.2, 0.3, 0.5};
  CHECK(d_max(diagonal(p), diagonal(q)).bits == doctest::Approx(std::log2(2.5)).epsilon(1e-6));
  CHECK_FALSE(d_max(diagonal({0.5, 0.5}), diagonal({1.0, 0.0})).finite());
}

TEST_CASE("smoothing a state against itself gains log2(1 - eps^2)") {
  // Subnormalized smoothing: ρ̄ = (1 − ε²) ρ is feasible and optimal.
  const DensityOperator rho = random_state(2, SubsystemDims({"A", "B"}, {2, 2}), 4);
  for (double eps : {0.05, 0.1, 0.2}) {
    const DivergenceValue v = smooth_d_max(rho, rho, eps);
    CHECK(v.bits == doctest::Approx(std::log2(1 - eps * eps)).epsilon(1e-4));
  }
}

TEST_CASE("smooth max-entropy of a maximally mixed qubit has a closed form") {
  // Minimize (√a + √b)² subject to (√a + √b)/√2 ≥ √(1 − ε²): 1 + log2(1 − ε²).
  for (double eps : {0.0, 0.1, 0.3}) {
    const DivergenceValue v = smooth_max_entropy(bell_state(), {"A"}, eps);
    CHECK(v.bits == doctest::Approx(1 + std::log2(1 - eps * eps)).epsilon(1e-6));
  }
}

TEST_CASE("mutual information of Bell and correlated states") {
  CHECK(mutual_information(bell_state(), {"A"}, {"B"}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(mutual_information(maxcorr_state(2), {"A"}, {"B"}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(conditional_mutual_information(ghz_state(3), {"A"}, {"B"}, {"C"}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entropy of a random state equals the Shannon entropy of its spectrum") {
  const DensityOperator rho = random_state(17, SubsystemDims({"A", "B"}, {2, 3}), 5);
  const auto ev = hermitian_eig(rho.matrix()).values;
  std::vector<double> p(ev.data(), ev.data() + ev.size());
  for (double& x : p) x = std::max(0.0, x);
  CHECK(von_neumann_entropy(rho) == doctest::Approx(shannon_bits(p)).epsilon(1e-10));
}

TEST_CASE("data processing, D_max above D, unitary invariance on random pairs") {
  const SubsystemDims dims({"A", "B"}, {2, 2});
  Rng rng(99);
  for (int t = 0; t < 10; ++t) {
    const DensityOperator rho = random_state(rng, dims, 4), sigma = random_state(rng, dims, 4);
    const double d = relative_entropy(rho, sigma).bits;
    const double d_a = relative_entropy(partial_trace(rho, {"A"}), partial_trace(sigma, {"A"})).bits;
    CHECK(d_a <= d + 1e-9);
    CHECK(d <= d_max(rho, sigma).bits + 1e-6);
    const ComplexMatrix u = random_unitary(rng, 4);
    const DensityOperator ur(u * rho.matrix() * u.adjoint(), dims), us(u * sigma.matrix() * u.adjoint(), dims);
    CHECK(relative_entropy(ur, us).bits == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("smooth d_max is non-increasing in eps") {
  const SubsystemDims dims({"A", "B"}, {2, 2});
  const DensityOperator rho = random_state(4, dims, 2), sigma = random_state(5, dims, 4);
  double prev = d_max(rho, sigma).bits;
  for (double eps : {0.05, 0.1, 0.2, 0.3}) {
    const double v = smooth_d_max(rho, sigma, eps).bits;
    CHECK(v <= prev + 1e-5);
    prev = v;
  }
}
