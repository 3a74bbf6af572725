#pragma once

// Catalytic disentangling: coordinated local unitary channels on ρ ⊗ σ^{⊗(M−1)},
// the budget that makes the output ε-close to separable, the converse
// gadgets, and the two-sided decoupling variant.

#include <optional>
#include <string>
#include <vector>

#include "disent/separability.hpp"

namespace disent {

/// M unitaries acting on the registers `on` (one party's side).
struct LocalUnitaries {
  Labels on;
  std::vector<ComplexMatrix> unitaries;
};

/// Entry i applies per_party[p].unitaries[i] on every party at once.
struct UnitaryEnsemble {
  int M = 1;
  std::vector<LocalUnitaries> per_party;

  void validate() const;  // unitary within 1e-10, every list of length M
};

/// (1/M) Σᵢ (⊗_p U_p^i) s (⊗_p U_p^i)†.
DensityOperator apply_randomizing_map(const UnitaryEnsemble& ens, const DensityOperator& s);

/// Registers are labelled "<label>.<k>", k = 1..M, as tensor_power does.
/// Entry i swaps registers 1 and i on every label; entry 1 is the identity.
UnitaryEnsemble build_swap_ensemble(int M, const SubsystemDims& party_dims);

/// ρ on register 1 followed by M−1 copies of σ, labelled like the ensemble.
DensityOperator catalyst_input(const DensityOperator& rho, const DensityOperator& sigma, int M);

/// (1/M) Σᵢ U^i s U^{i†} ⊗ |ii⟩⟨ii|, built from s ⊗ γ on the added registers
/// "Xa", "Xb" by controlled unitaries (Xa steers the first party, Xb the rest).
DensityOperator gamma_dilation(const UnitaryEnsemble& ens, const DensityOperator& s);

struct InequalityCheck {
  bool holds = false;
  double slack = 0;  // min eigenvalue of σ_AB ⊗ Π − σ_ext
};
/// σ_ext lives on σ_marginal's labels followed by "Xa", "Xb" (dimension M).
/// Blockwise: σ ⊗ Π − σ_ext = Σᵢ (σ − Eᵢ) ⊗ |ii⟩⟨ii| and zero off Π.
InequalityCheck check_operator_inequality(const DensityOperator& sigma_ext, const DensityOperator& sigma_marginal,
                                          int M);
/// Same inequality from the blocks Eᵢ = ⟨ii|σ_ext|ii⟩ directly.
InequalityCheck classical_extension_check(const ComplexMatrix& marginal, const std::vector<ComplexMatrix>& blocks);

struct SeparableCatalyst {
  std::string id;
  DensityOperator sigma;
  std::optional<ProductEnsemble> ensemble;  // separability certificate, if any
};

SeparableCatalyst catalyst_from_ensemble(std::string id, const ProductEnsemble& ens);

struct ProtocolOptions {
  /// Pinch σ onto ρ's eigenspaces (then restore PPT by mixing with I/d) so
  /// the pair commutes and large M stays exactly computable.
  bool refine = true;
};

struct ProtocolReport {
  int M = 1;
  double log2_M = 0;
  double eps_target = 0;
  double delta = 0;
  double achieved_distance = 1;
  std::string approx_mode;  // how σ's separability was certified
  double lower_bound_bits = 0;
  double upper_bound_bits = 0;
  std::string catalyst_id;
  bool pass = false;
  int budget_M = 1;  // register count from the budget arithmetic
};

/// Smooth max-entropy bounds attached to every report (ppt mode).
struct TheoremBounds {
  double lower_bits = 0;  // E_max^ε
  double upper_bits = 0;  // E_max^{ε−δ} + log2(1/δ) + 1
};
TheoremBounds theorem_bounds(const DensityOperator& rho, const Partition& partition, double eps, double delta);

/// Catalyst actually used: refined and certified, or the input unchanged.
struct PreparedCatalyst {
  DensityOperator sigma;
  std::string approx_mode;
  bool refined = false;
};
PreparedCatalyst prepare_catalyst(const DensityOperator& rho, const SeparableCatalyst& cat, const Partition& partition,
                                  const ProtocolOptions& options = {});

/// M = max(1, ⌊2^{D_max^{ε−δ}(ρ‖σ)} · 2/δ⌋).
int disentangling_budget(const DensityOperator& rho, const DensityOperator& sigma, double eps, double delta);

ProtocolReport run_disentangling(const DensityOperator& rho, const SeparableCatalyst& cat, const Partition& partition,
                                 double eps, double delta, const ProtocolOptions& options = {});

/// Nearest-separable witness, relative-entropy optimizer, I/d.
std::vector<SeparableCatalyst> default_candidates(const DensityOperator& rho, const Partition& partition);

/// Smallest certified M over candidates, searching down from each budget.
ProtocolReport one_shot_cost_search(const DensityOperator& rho, const Partition& partition, double eps, double delta,
                                    const std::vector<SeparableCatalyst>& candidates,
                                    const ProtocolOptions& options = {});

struct DecoupleResult {
  int M = 1;
  int budget_M = 1;
  double discarded_bits = 0;  // log|Xa| + log|Xb| = 2 log2 M
  double distance = 1;
  std::optional<DensityOperator> residual;  // materialized when small enough
  std::string approx_mode;
};

/// Two-sided decoupling to a separable state: the coordinated channel driven
/// by γ, with both halves of γ discarded.
DecoupleResult decouple_to_separable(const DensityOperator& rho, const SeparableCatalyst& cat,
                                     const Partition& partition, double eps, double delta,
                                     const ProtocolOptions& options = {});
/// Same construction aimed at the product of marginals.
DecoupleResult decouple_to_product(const DensityOperator& rho, const Partition& partition, double eps, double delta,
                                   const ProtocolOptions& options = {});

struct TheoremCase {
  std::string state_id;
  DensityOperator rho;
  Partition partition;
  double eps = 0;
  double delta = 0;
};
struct TheoremRow {
  std::string state_id;
  ProtocolReport report;
  std::string error;
};
std::vector<TheoremCase> default_theorem_grid();
std::vector<TheoremRow> verify_theorem(const std::vector<TheoremCase>& grid, int threads = 1);

}  // namespace disent
