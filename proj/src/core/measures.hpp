#pragma once

// Scalar resource quantifiers: min-entropy, G_min and its smoothed variants,
// global / free / delta-free robustness. All logarithms are base 2.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qmat.hpp"
#include "theories.hpp"

namespace rtd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Method { ClosedForm, SymmetricReduction, CuttingPlane, Bisection, GridOracle };
const char* to_string(Method m) noexcept;

/// Outcome of a robustness computation. When both certificate states are
/// present they satisfy rho = (1 + value) * free_point - value * mixing_state,
/// i.e. free_point = (rho + value * mixing_state) / (1 + value).
struct RobustnessResult {
  double value = 0.0;
  std::optional<DensityOperator> mixing_state;
  std::optional<DensityOperator> free_point;
  Method method = Method::ClosedForm;
  std::size_t iterations = 0;
  /// Certified optimality gap; +inf when the value is only an upper bound.
  double gap = 0.0;
  bool exact = true;
  std::vector<std::string> notes;
};

struct RobustnessOptions {
  /// Allow closed forms and symmetric reductions before the generic path.
  bool closed_forms = true;
  /// Cutting-plane stopping threshold on the smallest eigenvalue.
  double cut_tol = 1e-10;
  std::size_t max_cuts = 4000;
  /// Bisection tolerance on s for the delta-free robustness.
  double bisection_tol = 1e-9;
  /// Extra seeded random free mixing candidates for the generic delta path.
  std::size_t random_candidates = 2;
  std::uint64_t seed = 0;
};

double s_min(const DensityOperator& rho);

double g_min(const TheoryDescriptor& theory, const DensityOperator& rho);
double g_min(const TheoryDescriptor& theory, const WeightedPureState& psi);

RobustnessResult global_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                                   const RobustnessOptions& opts = {});
double global_log_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                             const RobustnessOptions& opts = {});

/// Coherence global robustness by cutting planes: minimize sum(m) subject to
/// diag(m) >= rho, adding the cut sum_i m_i |v_i|^2 >= <v|rho|v> for every
/// negative eigenpair of diag(m) - rho and re-solving the LP.
RobustnessResult coherence_global_robustness_cutting_plane(const DensityOperator& rho,
                                                           double cut_tol = 1e-10,
                                                           std::size_t max_cuts = 4000);

bool is_delta_free(const TheoryDescriptor& theory, const DensityOperator& rho, double delta,
                   double tol = kStructTol);

RobustnessResult free_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                                 const RobustnessOptions& opts = {});
RobustnessResult delta_free_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                                       double delta, const RobustnessOptions& opts = {});
double delta_free_log_robustness(const TheoryDescriptor& theory, const DensityOperator& rho, double delta,
                                 const RobustnessOptions& opts = {});

/// max(0, (d - 1) / (2^delta - 1) - 1) for any maximally coherent state on d
/// levels, mixing with I/d; +inf at delta = 0.
double delta_robustness_maximally_coherent(std::size_t d, double delta);
/// max(0, d F / 2^delta - 1) for the isotropic state of fidelity F on d x d,
/// mixing with the isotropic complement (I - Phi) / (d^2 - 1).
double delta_robustness_isotropic(std::size_t d, double fidelity_with_phi, double delta);

/// Fidelity of rho with the standard maximally entangled state if rho is
/// isotropic on d x d, std::nullopt otherwise.
std::optional<double> isotropic_fidelity(const DensityOperator& rho, double tol = 1e-9);

// ---- smoothing --------------------------------------------------------------

enum class BallKind { General, Pure };
enum class SearchKind { Auto, ClosedForm, LocalSearch, Grid };
const char* to_string(BallKind b) noexcept;
const char* to_string(SearchKind s) noexcept;

struct SmoothingBallSpec {
  double epsilon = 0.0;
  BallKind ball = BallKind::Pure;
  /// Auto picks the exact reduction for pure inputs and local search otherwise.
  SearchKind search = SearchKind::Auto;
  std::size_t restarts = 16;
  double step = 0.5;
  double step_decay = 0.7;
  std::size_t max_iter = 500;
  std::size_t grid_resolution = 400;
  std::uint64_t seed = 0;
};

struct SmoothedGmin {
  double value = 0.0;
  /// Ball element attaining the value: w |v><v| for the pure ball.
  std::optional<WeightedPureState> pure_argmax;
  /// General-ball element (subnormalized operator) when not rank one.
  std::optional<ComplexMatrix> argmax;
  /// F(argmax, rho).
  double argmax_fidelity = 0.0;
  /// True when the value is the supremum (exact reduction or eps = 0);
  /// false when it is a feasible lower estimate from a heuristic search.
  bool exact = false;
  SearchKind search_used = SearchKind::ClosedForm;
  std::vector<std::string> notes;
};

SmoothedGmin g_min_smoothed(const TheoryDescriptor& theory, const DensityOperator& rho,
                            const SmoothingBallSpec& spec);

}  // namespace rtd
