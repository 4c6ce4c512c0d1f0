#pragma once

// Rate interval for one-shot distillation of phi^m from rho under delta-RG
// operations: the converse (upper) bound from smoothed G_min, the achievable
// (lower) rate from the measure-and-prepare construction, and supporting
// quantities.

#include <optional>
#include <string>
#include <vector>

#include "channels.hpp"

namespace rtd {

struct ExtensiveConstant {
  double c = 0.0;
  /// "dephase", "partial_trace" or "log2_dim".
  std::string witness;
};

ExtensiveConstant extensive_constant(TheoryKind kind, const WeightedPureState& phi);

struct BoundOptions {
  SmoothingBallSpec smoothing{};
  /// Upper-bound smoothing for mixed inputs at d <= 3 also runs the grid
  /// oracle and keeps the larger value.
  bool grid_for_small_mixed = true;
  std::size_t grid_resolution = 200;
};

struct UpperBound {
  double value = 0.0;
  /// Same bound with the delta term max(delta, log2(1 + delta)).
  double conservative = 0.0;
  double c_phi = 0.0;
  double g_min_smoothed = 0.0;
  BallKind ball = BallKind::Pure;
  double smoothing_radius = 0.0;
  bool exact = true;
  std::vector<std::string> flags;
};

/// [G^{2 eps}_{min,*}(rho) + log2(1 + delta)] / c(phi) for pure rho and
/// [G^{2 sqrt(2 eps)}_min(rho) + log2(1 + delta)] / c(phi) otherwise.
UpperBound upper_bound(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                       double delta, double eps, const BoundOptions& opts = {});

struct LowerBound {
  std::size_t m = 0;
  std::optional<DistillationMap> map;
  /// G_min of the smoothed effect and the requirement at the returned m (or
  /// at m = 1 when no rate qualifies).
  double lhs = 0.0;
  double rhs = 0.0;
  std::string condition;
  /// floor(G / log2(1 + 2 R^0(phi))) when delta = 0 and R^0(phi) is finite.
  std::optional<std::size_t> remark_floor;
  bool exact = true;
  std::vector<std::string> flags;
};

/// Largest m <= cap for which the measure-and-prepare map can be built, with
/// that map attached.
LowerBound lower_bound(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                       double delta, double eps, std::size_t cap, const BoundOptions& opts = {});

struct PseudoSubadditive {
  double bound1 = 0.0;  // log2(1 + (1 + 2R)^m) - 1
  double bound2 = 0.0;  // m log2(1 + 2R)
  double r_delta = 0.0;
  /// LR^{m delta}(rho^m) when a closed form exists.
  std::optional<double> direct;
  bool chain_holds = true;
};

PseudoSubadditive pseudo_subadditive_bound(const TheoryDescriptor& theory, const DensityOperator& rho,
                                           std::size_t m, double delta);

struct BoundReport {
  TheoryKind kind = TheoryKind::Coherence;
  Dims dims;
  double delta = 0.0;
  double epsilon = 0.0;
  double c_phi = 0.0;
  double upper = 0.0;
  double upper_conservative = 0.0;
  std::size_t lower = 0;
  double g_min_smoothed = 0.0;
  BallKind smoothing_kind = BallKind::Pure;
  double smoothing_radius = 0.0;
  double lower_lhs = 0.0;
  double lower_rhs = 0.0;
  std::string lower_condition;
  std::optional<std::size_t> remark_floor;
  std::optional<double> fidelity_sq;
  bool exact = true;
  std::vector<std::string> heuristic_flags;
};

BoundReport rate_interval(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                          double delta, double eps, const BoundOptions& opts = {});

struct SweepRow {
  BoundReport report;
  std::optional<double> r_delta;
};

struct SweepOptions {
  BoundOptions bounds{};
  bool robustness_column = false;
  /// 0 uses the hardware concurrency.
  std::size_t threads = 0;
};

/// One report per (delta, epsilon), delta-major, computed concurrently and
/// returned in grid order.
std::vector<SweepRow> sweep(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                            const std::vector<double>& deltas, const std::vector<double>& epsilons,
                            const SweepOptions& opts = {});

}  // namespace rtd
