#include <doctest.h>

#include <cmath>

#include "disent/recovery.hpp"
#include "disent/states.hpp"

using namespace disent;

namespace {

const Labels kA{"A"}, kB{"B"}, kC{"C"};

// J of the identity channel: Σᵢⱼ |i⟩⟨j| ⊗ |i⟩⟨j|.
ChannelChoi identity_channel(int d, const std::string& in, const std::string& out) {
  ComplexMatrix j = ComplexMatrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) j(a * d + a, b * d + b) = 1;
  return {j, SubsystemDims({in}, {d}), SubsystemDims({out}, {d})};
}

// Fully depolarizing channel: J = I ⊗ I/d.
ChannelChoi depolarizing(int d, const std::string& in, const std::string& out) {
  return {ComplexMatrix::Identity(d * d, d * d) / static_cast<double>(d), SubsystemDims({in}, {d}),
          SubsystemDims({out}, {d})};
}

}  // namespace

TEST_CASE("identity and depolarizing channels act as expected") {
  const DensityOperator bell = bell_state();
  const ChannelChoi id = identity_channel(2, "B", "B2");
  id.validate();
  const DensityOperator same = apply_channel(id, bell, kB);
  CHECK(same.dims().labels() == Labels{"A", "B2"});
  CHECK((same.matrix() - bell.matrix()).cwiseAbs().maxCoeff() < 1e-14);

  const DensityOperator flat = apply_channel(depolarizing(2, "B", "B2"), bell, kB);
  CHECK((flat.matrix() - ComplexMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("non trace preserving Choi matrices are rejected") {
  ChannelChoi bad = identity_channel(2, "B", "B2");
  bad.choi *= 2;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("Petz map recovers Markov chains exactly") {
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const DensityOperator rho = random_markov_state(rng);
    CHECK(std::abs(conditional_mutual_information(rho, kA, kB, kC)) < 1e-9);
    const ChannelChoi r = petz_map(rho, kC, kA);
    r.validate();
    const DensityOperator rec = recovered_state(rho, r, kC);
    CHECK(rec.dims() == rho.dims());
    CHECK(purified_distance(rho, rec) < 1e-9);
  }
}

TEST_CASE("GHZ: one bit of conditional information, Petz recovery is optimal") {
  const DensityOperator ghz = ghz_state(3);
  CHECK(conditional_mutual_information(ghz, kA, kB, kC) == doctest::Approx(1.0).epsilon(1e-9));
  const RecoveryValue v = rel_entropy_of_recovery(ghz, kA, kB, kC);
  CHECK(v.bits <= v.petz_bits + 1e-9);
  CHECK(v.bits == doctest::Approx(1.0).epsilon(1e-4));
  const RecoveryFidelity f = fidelity_of_recovery(ghz, kA, kB, kC);
  CHECK(f.fidelity == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-5));
  CHECK(f.lower_bound_bits <= v.bits + 1e-4);
}

TEST_CASE("relative entropy of recovery is sandwiched on a random state") {
  const DensityOperator rho = random_state(9, SubsystemDims({"A", "B", "C"}, {2, 2, 2}), 3);
  const RecoveryValue v = rel_entropy_of_recovery(rho, kA, kB, kC);
  const RecoveryFidelity f = fidelity_of_recovery(rho, kA, kB, kC);
  CHECK(v.bits <= v.petz_bits + 1e-9);
  CHECK(f.lower_bound_bits <= v.bits + 1e-4);
  CHECK(v.bits >= -1e-9);
}

TEST_CASE("degrading GHZ meets eps at the convex-split budget") {
  const DensityOperator ghz = ghz_state(3);
  const DegradingReport probe = simulate_recovery_degrading(ghz, kA, kB, kC, 1, 0.3);
  CHECK(probe.dmax_bits == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(probe.budget_M == 7);
  const DegradingReport r = simulate_recovery_degrading(ghz, kA, kB, kC, probe.budget_M, 0.3);
  CHECK(r.pass);
  CHECK(r.distance <= 0.3);
}

TEST_CASE("converse gadget holds on GHZ and a random state") {
  const ConverseCheck g = appendix_converse_check(ghz_state(3), kA, kB, kC, 2);
  CHECK(g.holds);
  CHECK(g.commutation_residual <= 1e-9);
  const ConverseCheck r =
      appendix_converse_check(random_state(4, SubsystemDims({"A", "B", "C"}, {2, 2, 2}), 8), kA, kB, kC, 2);
  CHECK(r.holds);
}

TEST_CASE("recovery inputs must partition the labels") {
  CHECK_THROWS_AS(rel_entropy_of_recovery(ghz_state(3), kA, kA, kC), Error);
  CHECK_THROWS_AS(simulate_recovery_degrading(ghz_state(3), kA, kB, kC, 0, 0.3), Error);
}
