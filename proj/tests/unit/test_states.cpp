#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "disent/separability.hpp"
#include "disent/state_io.hpp"
#include "disent/states.hpp"

using namespace disent;

TEST_CASE("named families have the textbook spectra") {
  const auto bell = hermitian_eig(bell_state().matrix()).values;
  CHECK(bell(0) == doctest::Approx(1.0));
  CHECK(std::abs(bell(1)) < 1e-12);

  // Werner p: antisymmetric eigenvalue p, symmetric eigenvalues (1−p)/3.
  const auto w = hermitian_eig(werner_state(0.9).matrix()).values;
  CHECK(w(0) == doctest::Approx(0.9));
  CHECK(w(3) == doctest::Approx(0.1 / 3));

  CHECK(maxcorr_state(3).dim() == 9);
  CHECK(ghz_state(3).dims().labels() == Labels{"A", "B", "C"});
}

TEST_CASE("Werner states are PPT exactly up to p = 1/2") {
  const Partition part = Partition::split({"A"}, {"B"});
  CHECK(is_ppt(werner_state(0.5), part).ppt);
  CHECK_FALSE(is_ppt(werner_state(0.55), part).ppt);
  CHECK(is_ppt(isotropic_state(0.5), part).ppt);
  CHECK_FALSE(is_ppt(isotropic_state(0.55), part).ppt);
}

TEST_CASE("random states are seeded and have the requested rank") {
  const SubsystemDims dims({"A", "B"}, {2, 3});
  const DensityOperator a = random_state(42, dims, 2), b = random_state(42, dims, 2);
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
  const auto ev = hermitian_eig(a.matrix()).values;
  CHECK(ev(1) > 1e-6);
  CHECK(std::abs(ev(2)) < 1e-12);
}

TEST_CASE("state spec grammar") {
  CHECK(parse_state_spec("werner:0.3").dim() == 4);
  CHECK(parse_state_spec("random:1,2,3,2").dim() == 6);
  CHECK(parse_state_spec("markov:4").dims().labels() == Labels{"A", "B", "C"});
  CHECK(parse_state_spec("random3:2").dim() == 8);
  CHECK_THROWS_AS(parse_state_spec("nosuch"), Error);
  CHECK_THROWS_AS(parse_state_spec("werner:abc"), Error);
  CHECK_THROWS_AS(parse_state_spec("bell:1"), Error);
}

TEST_CASE("state JSON round-trips and names the broken field") {
  const DensityOperator rho = random_state(9, SubsystemDims({"A", "B"}, {2, 2}), 3);
  const DensityOperator back = parse_state_json(state_to_json(rho));
  CHECK(back.dims() == rho.dims());
  CHECK((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-15);

  try {
    parse_state_json(R"({"dims": [{"label": "A", "dim": 2}], "subnormalized": false, "matrix_re": [[1, 0]]})");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFile);
  }
  CHECK_THROWS_AS(parse_state_json("{not json"), Error);
}

TEST_CASE("atomic write leaves the complete file") {
  const std::string path = "disent_atomic_test.json";
  write_file_atomic(path, state_to_json(bell_state()));
  const DensityOperator back = read_state_file(path);
  CHECK(back.dim() == 4);
  std::remove(path.c_str());
}
