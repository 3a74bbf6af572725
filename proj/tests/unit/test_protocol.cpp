#include <doctest.h>

#include <cmath>

#include "disent/convexsplit.hpp"
#include "disent/protocol.hpp"
#include "disent/states.hpp"

using namespace disent;

namespace {

const Partition kAB = Partition::split({"A"}, {"B"});

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

Labels drop_last(Labels l, std::size_t n) {
  l.resize(l.size() - n);
  return l;
}

}  // namespace

TEST_CASE("swap ensemble is unitary and entry one is the identity") {
  const UnitaryEnsemble ens = build_swap_ensemble(3, bell_state().dims());
  ens.validate();
  CHECK(ens.per_party.size() == 2);
  for (const auto& lu : ens.per_party) {
    CHECK(lu.unitaries.size() == 3);
    CHECK(max_abs(lu.unitaries[0] - ComplexMatrix::Identity(lu.unitaries[0].rows(), lu.unitaries[0].cols())) == 0.0);
  }
}

TEST_CASE("randomizing the catalyst input with swaps yields the convex split state") {
  const DensityOperator rho = random_state(3, SubsystemDims({"A", "B"}, {2, 2}), 2);
  const DensityOperator sigma = werner_state(0.3);
  for (int m = 1; m <= 3; ++m) {
    const DensityOperator out =
        apply_randomizing_map(build_swap_ensemble(m, rho.dims()), catalyst_input(rho, sigma, m));
    CHECK(max_abs(out.matrix() - build_convex_split({rho, sigma, m, 0, 1}).matrix()) < 1e-12);
  }
}

TEST_CASE("gamma dilation reduces to the randomizing map and is classical on X") {
  const DensityOperator rho = random_state(8, SubsystemDims({"A", "B"}, {2, 2}), 3);
  const DensityOperator sigma = maximally_mixed(rho.dims());
  for (int m = 2; m <= 3; ++m) {
    const UnitaryEnsemble ens = build_swap_ensemble(m, rho.dims());
    const DensityOperator in = catalyst_input(rho, sigma, m);
    const DensityOperator dil = gamma_dilation(ens, in);
    const DensityOperator marginal = partial_trace(dil, drop_last(dil.dims().labels(), 2));
    CHECK(max_abs(marginal.matrix() - apply_randomizing_map(ens, in).matrix()) < 1e-12);
    CHECK(check_operator_inequality(dil, marginal, m).holds);
  }
}

TEST_CASE("classical extension check flags blocks that exceed the marginal") {
  const SubsystemDims dims({"A"}, {2});
  const ComplexMatrix e1 = random_state(1, dims, 2).matrix() * 0.5;
  const ComplexMatrix e2 = random_state(2, dims, 2).matrix() * 0.5;
  CHECK(classical_extension_check(e1 + e2, {e1, e2}).holds);
  const InequalityCheck bad = classical_extension_check(e1, {e1, e2});
  CHECK_FALSE(bad.holds);
  CHECK(bad.slack < -1e-3);
}

TEST_CASE("operator inequality rejects extensions off the correlated subspace") {
  const DensityOperator marginal = maximally_mixed(SubsystemDims({"A"}, {2}));
  const DensityOperator ext = tensor_product(marginal, maximally_mixed(SubsystemDims({"Xa", "Xb"}, {2, 2})));
  CHECK_THROWS_AS(check_operator_inequality(ext, marginal, 2), Error);
}

TEST_CASE("budget is the floor of 2^D_max * 2 / delta") {
  // D_max^{ε−δ}(ρ‖ρ) = log2(1 − (ε−δ)²) for subnormalized smoothing.
  const DensityOperator rho = werner_state(0.3);
  const double expect = std::floor((1 - 0.01) * 2 / 0.1);
  CHECK(disentangling_budget(rho, rho, 0.2, 0.1) == static_cast<int>(expect));
}

TEST_CASE("Bell disentangles within eps inside the sandwich") {
  const ProtocolReport r = one_shot_cost_search(bell_state(), kAB, 0.2, 0.1, default_candidates(bell_state(), kAB));
  CHECK(r.pass);
  CHECK(r.achieved_distance <= 0.2);
  CHECK(r.lower_bound_bits <= r.log2_M + 1e-6);
  CHECK(r.log2_M <= r.upper_bound_bits + 1e-3);
  CHECK(r.approx_mode == "ppt-exact");
  CHECK(r.M <= r.budget_M);
}

TEST_CASE("separable inputs need no noise") {
  for (const char* spec : {"maxcorr:2", "werner:0.3"}) {
    const DensityOperator rho = parse_state_spec(spec);
    const ProtocolReport r = one_shot_cost_search(rho, kAB, 0.1, 0.05, default_candidates(rho, kAB));
    CHECK(r.M == 1);
    CHECK(r.pass);
    CHECK(r.achieved_distance <= 1e-6);
  }
}

TEST_CASE("decoupling to a product costs more than decoupling to a separable state") {
  const auto cands = default_candidates(bell_state(), kAB);
  const DecoupleResult sep = decouple_to_separable(bell_state(), cands[0], kAB, 0.3, 0.1);
  const DecoupleResult prod = decouple_to_product(bell_state(), kAB, 0.3, 0.1);
  CHECK(sep.distance <= 0.3);
  CHECK(prod.distance <= 0.3);
  CHECK(sep.discarded_bits == doctest::Approx(2 * std::log2(sep.M)));
  CHECK(prod.discarded_bits > sep.discarded_bits);
}

TEST_CASE("non-PPT catalysts are refused") {
  const SeparableCatalyst cat{"bell", bell_state(), std::nullopt};
  CHECK_THROWS_AS(run_disentangling(werner_state(0.9), cat, kAB, 0.2, 0.1, {false}), Error);
}
