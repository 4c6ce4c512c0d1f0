#pragma once

// Quantum channels used by the distillation bounds: generic Kraus maps, the
// two-outcome measure-and-prepare map, complete dephasing and the basis
// permutation twirl. Also certification of delta-resource-generating maps.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "measures.hpp"

namespace rtd {

struct KrausMap {
  std::vector<ComplexMatrix> ops;
};

/// w(omega) = Tr[E omega]; output (1 - w) failure + w success.
struct MeasurePrepare {
  ComplexMatrix effect;
  WeightedPureState success;
  DensityOperator failure;
};

struct Dephasing {};
struct Twirl {};

class Channel {
 public:
  using Variant = std::variant<KrausMap, MeasurePrepare, Dephasing, Twirl>;

  static Channel kraus(std::vector<ComplexMatrix> ops, Dims in_dims, Dims out_dims);
  static Channel measure_prepare(ComplexMatrix effect, WeightedPureState success, DensityOperator failure,
                                 Dims in_dims);
  static Channel dephasing(Dims dims);
  static Channel twirl(Dims dims);

  const Variant& variant() const { return variant_; }
  const Dims& in_dims() const { return in_dims_; }
  const Dims& out_dims() const { return out_dims_; }
  const char* kind_name() const;

 private:
  Channel(Variant v, Dims in, Dims out) : variant_(std::move(v)), in_dims_(std::move(in)), out_dims_(std::move(out)) {}
  Variant variant_;
  Dims in_dims_;
  Dims out_dims_;
};

DensityOperator apply(const Channel& channel, const DensityOperator& rho);

/// Average of P rho P^T over all basis permutations P. Enumerated for d <= 8;
/// for larger d the average is written down directly (uniform diagonal, mean
/// off-diagonal), which is what the enumeration converges to.
DensityOperator twirl(const DensityOperator& rho);

struct CheckedPoint {
  std::size_t index = 0;
  double output_lr = 0.0;
  /// <phi^m| Lambda(gamma) |phi^m> for measure-and-prepare channels.
  std::optional<double> target_overlap;
  bool delta_free_input = false;
};

struct DeltaRGCertificate {
  double delta = 0.0;
  std::vector<CheckedPoint> checked_points;
  double max_output_lr = 0.0;
  /// True when every extreme point of F was checked with an exact LR_g and no
  /// sampled F^delta inputs were needed.
  bool exhaustive = false;
  bool verdict = false;
  std::vector<std::string> notes;
};

struct CertifyOptions {
  /// Product-state sample size for entanglement inputs.
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  /// Extra inputs drawn from the boundary of F^delta (delta > 0 only).
  std::size_t delta_free_samples = 0;
  double tol = kStructTol;
};

/// Checks Lambda(gamma) in F^delta for the extreme points of F (and optional
/// F^delta samples). Affine channels extend the extreme-point check to all of
/// F because sublevel sets of LR_g are convex.
DeltaRGCertificate certify_delta_rg(const Channel& channel, TheoryKind kind, double delta,
                                    const CertifyOptions& opts = {});

struct ExtensivityCheck {
  bool passed = false;
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// max over checked gamma of <phi^m|gamma|phi^m> * 2^{m c}.
  double worst_ratio = 0.0;
};

/// Tests phi^m gamma phi^m <= 2^{-m c} phi^m, i.e. <phi^m|gamma|phi^m> <= 2^{-m c},
/// over every extreme free state (coherence, purity) or `trials` sampled
/// product states plus the exact maximizer (entanglement).
ExtensivityCheck verify_extensivity(TheoryKind kind, const WeightedPureState& phi, std::size_t m, double c,
                                    std::size_t trials = 1000, std::uint64_t seed = 0, double tol = 1e-9);

/// Tr(Q rho) and ||rho - sqrt(Q) rho sqrt(Q)||_1 for 0 <= Q <= I.
struct GentleMeasurement {
  double success = 0.0;
  double disturbance = 0.0;
};
GentleMeasurement gentle_measurement(const DensityOperator& rho, const ComplexMatrix& q);

// ---- distillation map -------------------------------------------------------

/// Fixed mixing state used for phi^m: I/D for coherence and purity, the
/// orthogonal complement (I - phi^m)/(D - 1) for entanglement.
DensityOperator canonical_mixing_state(TheoryKind kind, const WeightedPureState& phi_m);

/// Uniform superposition (coherence), full-rank flat Schmidt spectrum on
/// d x d (entanglement) or any pure state (purity).
bool is_maximally_resourceful(TheoryKind kind, const WeightedPureState& phi);

/// Right-hand side of the sufficient condition for rate m.
struct TargetRequirement {
  /// Requirement on G_min of the effect, in bits (may be +inf).
  double value = 0.0;
  /// "direct": LR^delta(phi^m) along the canonical mixing ray, evaluated in
  /// closed form. "single_copy": m log2(1 + 2 R^{delta/m}(phi)).
  std::string condition;
  /// False when the requirement is an upper estimate (still safe to use).
  bool exact = true;
  std::vector<std::string> notes;
};
TargetRequirement target_requirement(TheoryKind kind, const WeightedPureState& phi, std::size_t m, double delta);

struct DistillationOptions {
  /// Build the map even when the sufficient condition fails (flagged).
  bool allow_unverified = false;
  SmoothingBallSpec smoothing{};
};

struct DistillationMap {
  Channel channel;
  std::size_t m = 0;
  double lhs = 0.0;  // G_min of the effect
  double rhs = 0.0;  // requirement from target_requirement
  std::string condition;
  bool hypothesis_met = false;
  /// Smoothing radius used for the effect: 1 - sqrt(1 - 2 eps).
  double effect_epsilon = 0.0;
  double effect_overlap = 0.0;  // Tr[effect rho]
  double fidelity_sq = 0.0;     // <phi^m| Lambda(rho) |phi^m>
  bool fidelity_guarantee = false;  // fidelity_sq >= 1 - 2 eps
  std::vector<std::string> notes;
};

/// Smoothing radius that makes Tr[psibar rho] >= 1 - 2 eps for every pure-ball
/// element psibar.
double effect_epsilon(double eps);

DistillationMap build_distillation_map(const TheoryDescriptor& theory, const DensityOperator& rho,
                                       const WeightedPureState& phi, std::size_t m, double delta, double eps,
                                       const DistillationOptions& opts = {});
/// Same, reusing a smoothing result computed at effect_epsilon(eps).
DistillationMap build_distillation_map(const TheoryDescriptor& theory, const DensityOperator& rho,
                                       const SmoothedGmin& effect, const WeightedPureState& phi, std::size_t m,
                                       double delta, double eps, const DistillationOptions& opts = {});

}  // namespace rtd
