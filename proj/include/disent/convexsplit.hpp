#pragma once

// Convex split: τ = (1/N) Σᵢ ρ_i ⊗ σ^{⊗(N−1)} on N registers, its distance to
// σ^{⊗N}, and the register count that makes the distance small.

#include <string>
#include <vector>

#include "disent/qmatrix.hpp"

namespace disent {

struct ConvexSplitSpec {
  DensityOperator rho;
  DensityOperator sigma;
  int N = 1;
  double zeta = 0;
  double xi = 1;

  void validate() const;
};

/// Largest register dimension for which τ is built densely.
inline constexpr int kDenseLimit = 4096;

/// Registers are labelled like tensor_power: "<label>.<i>".
DensityOperator build_convex_split(const ConvexSplitSpec& spec);

struct SplitDistance {
  double distance = 0;
  double fidelity = 1;
  bool commuting_path = false;  // evaluated in a joint eigenbasis
};

/// Exact P(τ, σ^{⊗N}). Commuting pairs use a joint eigenbasis and a sum over
/// occupation types; otherwise τ is built densely (DimensionBlowup above
/// kDenseLimit).
SplitDistance convex_split_distance(const ConvexSplitSpec& spec);
SplitDistance convex_split_distance(const DensityOperator& rho, const DensityOperator& sigma, int N);

/// True when ‖ρσ − σρ‖ is below tol (entrywise max).
bool commute(const ComplexMatrix& a, const ComplexMatrix& b, double tol = 1e-9);

struct RegisterCount {
  int N = 1;
  double dmax_bits = 0;  // smoothed max-relative entropy used for N
};

/// N = ⌈2^{D_max^ζ(ρ‖σ)} / ξ⌉ (ζ = 0 uses the unsmoothed value).
RegisterCount registers_for(const DensityOperator& rho, const DensityOperator& sigma, double zeta, double xi);

struct LemmaInstance {
  std::string rho_id;
  std::string sigma_id;
  DensityOperator rho;
  DensityOperator sigma;
  double zeta = 0;
  double xi = 1;
};

struct LemmaRow {
  std::string rho_id;
  std::string sigma_id;
  double zeta = 0;
  double xi = 0;
  int N = 0;
  double dmax_bits = 0;
  double measured_P = 0;
  double smoothed_P = 0;  // same construction with the smoothing optimizer ρ̄
  double bound = 0;
  bool pass = false;
  bool monotone = true;  // P non-increasing over N = 1..N on this row
  std::vector<double> sweep;
  std::string error;
};

std::vector<LemmaInstance> default_lemma_grid(std::uint64_t seed = 0);
LemmaRow verify_lemma_row(const LemmaInstance& inst);
std::vector<LemmaRow> verify_lemma(const std::vector<LemmaInstance>& grid, int threads = 1);

}  // namespace disent
