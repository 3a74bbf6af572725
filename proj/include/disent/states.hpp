#pragma once

// Named state families and seeded random generators.

#include <cstdint>
#include <random>
#include <string>

#include "disent/qmatrix.hpp"

namespace disent {

using Rng = std::mt19937_64;

/// |Φ+⟩ on two qubits A, B.
DensityOperator bell_state();
/// Weight p on the antisymmetric subspace, 1−p on the symmetric one
/// (both normalized); entangled iff p > 1/2.
DensityOperator werner_state(double p, int d = 2);
/// Fidelity f with |Φ+⟩, the rest spread uniformly; entangled iff f > 1/d.
DensityOperator isotropic_state(double f, int d = 2);
/// (|0…0⟩ + |1…1⟩)/√2 on k qubits labelled A, B, C, …
DensityOperator ghz_state(int k);
/// (1/M) Σᵢ |ii⟩⟨ii| on two M-level registers.
DensityOperator maxcorr_state(int m, const std::string& a = "A", const std::string& b = "B");
/// Induced (Haar-purification) random state of the given rank.
DensityOperator random_state(std::uint64_t seed, const SubsystemDims& dims, int rank);
DensityOperator random_state(Rng& rng, const SubsystemDims& dims, int rank);

ComplexMatrix random_unitary(Rng& rng, int d);
ComplexVector random_unit_vector(Rng& rng, int d);
DensityOperator maximally_mixed(const SubsystemDims& dims);

/// Random quantum Markov chain A−C−B (labels A, B, C; qubits): C is split
/// into classical branches and rotated by a random unitary, so I(A:B|C) = 0.
DensityOperator random_markov_state(Rng& rng);

/// Letters A, B, C, … for k parties.
Labels default_labels(int k);

/// Parses `family[:param[,param]]` (bell, werner:p, isotropic:f, ghz:k,
/// maxcorr:M, random:seed[,dA,dB[,rank]], mixed:dA,dB, markov:seed,
/// random3:seed[,rank]) or `file:path`.
DensityOperator parse_state_spec(const std::string& spec);

}  // namespace disent
