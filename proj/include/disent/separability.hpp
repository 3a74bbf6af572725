#pragma once

// Computable surrogates for the separable set. PPT mode relaxes SEP from the
// outside (lower bounds for minimizations, exact in 2⊗2 and 2⊗3); ensemble
// mode restricts it to explicit product ensembles (upper bounds).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "disent/divergences.hpp"

namespace disent {

/// Groups of labels treated as single parties; groups are disjoint and
/// together cover the state's labels.
struct Partition {
  std::vector<Labels> groups;

  static Partition split(const Labels& a, const Labels& b) { return {{a, b}}; }
  /// Every label its own party.
  static Partition singletons(const SubsystemDims& dims);

  void validate(const SubsystemDims& dims) const;  // throws BadPartition
};

enum class ApproxMode { ppt, ensemble };
std::string_view to_string(ApproxMode mode);
ApproxMode parse_approx_mode(const std::string& text);

struct SepApprox {
  ApproxMode mode = ApproxMode::ppt;
  /// Label sets whose partial transposes are constrained (ppt mode).
  std::vector<Labels> cut_set;
};

/// Cuts for the PPT relaxation: every ⌈k/2⌉-subset of groups, one per
/// complementary pair.
std::vector<Labels> ppt_cuts(const Partition& partition);
SepApprox make_approx(ApproxMode mode, const Partition& partition);

struct ProductPoint {
  double weight = 0;
  std::vector<ComplexVector> states;  // one unit vector per group
};

struct ProductEnsemble {
  SubsystemDims dims;
  Partition partition;
  std::vector<ProductPoint> points;

  /// Weights sum to one and every factor is a unit vector of the right size.
  void validate() const;
};

DensityOperator realize(const ProductEnsemble& ens);
std::string ensemble_to_json(const ProductEnsemble& ens);
ProductEnsemble ensemble_from_json(const std::string& text);

struct PptCheck {
  bool ppt = false;
  double min_eigenvalue = 0;  // over every cut
};
PptCheck is_ppt(const DensityOperator& s, const Partition& partition);

/// Product pure state (grouped by the partition) maximizing ⟨ψ|h|ψ⟩, by
/// alternating top-eigenvector updates from seeded random starts.
struct ProductOptimum {
  std::vector<ComplexVector> states;  // per group
  ComplexMatrix projector;            // |ψ⟩⟨ψ| in the original label order
  double value = 0;
};
ProductOptimum best_product_state(const ComplexMatrix& h, const SubsystemDims& dims, const Partition& partition,
                                  std::uint64_t seed = 0, int restarts = 32);

struct SepDivergence : DivergenceValue {
  ApproxMode mode = ApproxMode::ppt;
  std::optional<ProductEnsemble> ensemble;
  double regularization = 0;
};

SepDivergence ree(const DensityOperator& rho, const Partition& partition, ApproxMode mode, double tol = 1e-6);
SepDivergence e_max_smooth(const DensityOperator& rho, const Partition& partition, double eps, ApproxMode mode);

struct NearestSeparable {
  double distance = 0;
  DensityOperator witness;
  ApproxMode mode = ApproxMode::ppt;
  std::optional<ProductEnsemble> ensemble;
};
NearestSeparable nearest_sep_distance(const DensityOperator& s, const Partition& partition, ApproxMode mode);

}  // namespace disent
