#pragma once

// Brute-force references for the optimizers in measures: grids over the
// free simplex and the pure-state ball, and a ray bisection for the
// delta-free robustness. They share no solver code with the main paths
// (spectral checks use Eigen's own routines rather than herm_eig).

#include "measures.hpp"

namespace rtd {

/// -log2 of the best Tr(rho gamma) over a simplex grid of free states.
/// Coherence and purity only, d <= 4.
double grid_g_min(const TheoryDescriptor& theory, const DensityOperator& rho, std::size_t resolution);

/// Feasible maximum of G_min over a grid of ball elements, d <= 3. The pure
/// ball is gridded by angles (phase-aligned with the dominant eigenvector for
/// d = 3), refined by a zooming regrid around the best angles, with a weight
/// grid of step 1/resolution^2 and floor 1e-6. The general ball adds mixtures
/// of rho with gridded pure states and, for coherence, gridded diagonal
/// rescalings D rho D.
double grid_smoothed_g_min(const TheoryDescriptor& theory, const DensityOperator& rho, double epsilon,
                           BallKind ball, std::size_t resolution);

/// Upper estimate of R_g: coherence d <= 3 searches diagonal majorizers over a
/// zooming simplex grid; purity bisects on mu with a Cholesky PSD test.
double grid_global_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                              std::size_t resolution);

/// Smallest s in [0, 1e6] with (rho + s pi)/(1+s) in F^delta, to within tol;
/// +inf when even s = 1e6 fails. Coherence uses the cutting-plane R_g only.
double bisection_delta_robustness(const TheoryDescriptor& theory, const DensityOperator& rho, double delta,
                                  const DensityOperator& pi, double tol = 1e-9);

}  // namespace rtd
