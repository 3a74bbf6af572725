#include <doctest.h>

#include <cmath>

#include "disent/separability.hpp"
#include "disent/states.hpp"

using namespace disent;

namespace {

const Partition kAB = Partition::split({"A"}, {"B"});

double binary_entropy(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

}  // namespace

TEST_CASE("relative entropy of entanglement of Bell is one bit in both modes") {
  CHECK(ree(bell_state(), kAB, ApproxMode::ppt).bits == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(ree(bell_state(), kAB, ApproxMode::ensemble).bits == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("two-qubit Werner states: 1 - h(p) above the threshold, zero below") {
  // Singlet fraction p > 1/2 gives E_R = 1 − h(p).
  for (double p : {0.6, 0.75, 0.9}) {
    const double expect = 1 - binary_entropy(p);
    CHECK(ree(werner_state(p), kAB, ApproxMode::ppt).bits == doctest::Approx(expect).epsilon(1e-3));
    CHECK(std::abs(ree(werner_state(p), kAB, ApproxMode::ensemble).bits - expect) < 2e-3);
  }
  CHECK(ree(werner_state(0.3), kAB, ApproxMode::ppt).bits < 1e-6);
  CHECK(ree(maxcorr_state(2), kAB, ApproxMode::ppt).bits < 1e-6);
}

TEST_CASE("ppt-mode optimizer is PPT and its value is a dual-certified bound") {
  const SepDivergence v = ree(werner_state(0.8), kAB, ApproxMode::ppt);
  REQUIRE(v.certificate);
  CHECK(is_ppt(*v.certificate, kAB).ppt);
  if (v.dual_bound) CHECK(*v.dual_bound <= v.bits + 1e-9);
}

TEST_CASE("ensemble mode returns a valid product ensemble that realizes the certificate") {
  const SepDivergence v = ree(werner_state(0.9), kAB, ApproxMode::ensemble);
  REQUIRE(v.ensemble);
  v.ensemble->validate();
  const DensityOperator real = realize(*v.ensemble);
  CHECK(is_ppt(real, kAB).ppt);
  const ProductEnsemble back = ensemble_from_json(ensemble_to_json(*v.ensemble));
  CHECK((realize(back).matrix() - real.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nearest separable distance vanishes exactly on PPT inputs") {
  CHECK(nearest_sep_distance(werner_state(0.4), kAB, ApproxMode::ppt).distance < 1e-6);
  CHECK(nearest_sep_distance(bell_state(), kAB, ApproxMode::ppt).distance > 0.1);
}

TEST_CASE("best product state of a product projector attains one") {
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  h(2, 2) = 1;  // |10⟩⟨10|
  const ProductOptimum opt = best_product_state(h, SubsystemDims({"A", "B"}, {2, 2}), kAB);
  CHECK(opt.value == doctest::Approx(1.0).epsilon(1e-10));
  // Bell overlap with any product state is at most 1/2.
  const ProductOptimum b = best_product_state(bell_state().matrix(), bell_state().dims(), kAB);
  CHECK(b.value == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("partitions are validated") {
  CHECK_THROWS_AS(Partition::split({"A"}, {"A"}).validate(bell_state().dims()), Error);
  CHECK_THROWS_AS(Partition::split({"A"}, {}).validate(bell_state().dims()), Error);
  CHECK(ppt_cuts(Partition::singletons(ghz_state(3).dims())).size() == 3);
}
