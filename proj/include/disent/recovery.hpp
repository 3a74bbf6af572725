#pragma once

// Locally recovered states (I_B ⊗ R_{C→AC})(ρ_BC): channels in Choi form,
// the Petz map, the relative entropy and fidelity of recovery, and the
// recovery-degrading and converse checks built on them.

#include <optional>
#include <string>

#include "disent/divergences.hpp"

namespace disent {

/// J = Σᵢⱼ |i⟩⟨j|_in ⊗ Φ(|i⟩⟨j|)_out.
struct ChannelChoi {
  ComplexMatrix choi;
  SubsystemDims in_dims;
  SubsystemDims out_dims;

  /// PSD and trace preserving within 1e-9; throws InvalidState otherwise.
  void validate() const;
};

/// Applies the channel to the registers `on` of s (matched to in_dims in
/// order). Output labels: the untouched registers in their original order,
/// then out_dims.
DensityOperator apply_channel(const ChannelChoi& ch, const DensityOperator& s, const Labels& on);

/// Petz map R_{C→AC}(X) = ρ_AC^{1/2} (I_A ⊗ ρ_C^{−1/2} X ρ_C^{−1/2}) ρ_AC^{1/2},
/// out_dims = rebuild then from. Off supp ρ_C it traces out and prepares ρ_AC.
ChannelChoi petz_map(const DensityOperator& s, const Labels& from, const Labels& rebuild);

/// (I_B ⊗ R)(ρ_BC) in the label order of s.
DensityOperator recovered_state(const DensityOperator& s, const ChannelChoi& r, const Labels& c);

struct RecoveryValue : DivergenceValue {
  std::optional<ChannelChoi> channel;  // optimizer
  double petz_bits = 0;                // D(ρ ‖ Petz-recovered ρ), an upper bound
};

/// min over channels R_{C→AC} of D(ρ_ABC ‖ (I_B ⊗ R)(ρ_BC)); never above the
/// Petz value.
RecoveryValue rel_entropy_of_recovery(const DensityOperator& s, const Labels& a, const Labels& b, const Labels& c,
                                      double tol = 1e-6);

struct RecoveryFidelity {
  double fidelity = 0;
  double lower_bound_bits = 0;  // −2 log2 F ≤ relative entropy of recovery
  std::optional<ChannelChoi> channel;
};
/// max over channels R_{C→AC} of F(ρ_ABC, (I_B ⊗ R)(ρ_BC)), by SDP.
RecoveryFidelity fidelity_of_recovery(const DensityOperator& s, const Labels& a, const Labels& b, const Labels& c);

struct DegradingReport {
  int M = 1;
  double log2_M = 0;
  double eps_target = 0;
  int budget_M = 1;
  double dmax_bits = 0;      // D_max(ρ ‖ Petz-recovered ρ)
  double distance = 1;       // P(Λ^M(ρ ⊗ ω), recovered target)
  double petz_distance = 0;  // P(ρ, Petz-recovered ρ)
  double cmi_bits = 0;
  double rec_value_bits = 0;
  std::string recovery_family = "petz";
  bool pass = false;
};

/// M = max(1, ⌊2^{D_max^{ε−δ}(ρ‖σ_R)} · 2/δ⌋) with σ_R the Petz-recovered state.
int recovery_budget(const DensityOperator& rho, const Labels& a, const Labels& c, double eps, double delta);

/// Catalyst ω = σ_R^{⊗(M−1)}, the swap ensemble on every party, and the
/// distance to σ_R^{⊗M}.
DegradingReport simulate_recovery_degrading(const DensityOperator& rho, const Labels& a, const Labels& b,
                                            const Labels& c, int M, double eps);

struct ConverseCheck {
  bool holds = false;
  double commutation_residual = 0;  // controlled C-permutations vs B-permutations
  double slack = 0;                 // operator inequality on the X registers
};

/// Controlled swap dilation of ρ^{⊗M} ⊗ γ_{X_A X_B X_C}: the B/C permutation
/// exchange on ρ_BC^{⊗M} ⊗ γ, and β ≤ Tr_X β ⊗ Π_γ for the classical β.
ConverseCheck appendix_converse_check(const DensityOperator& rho, const Labels& a, const Labels& b, const Labels& c,
                                      int M);

}  // namespace disent
