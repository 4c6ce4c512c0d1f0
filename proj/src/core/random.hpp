#pragma once

// Seeded generators for test and verification fodder. Every function takes
// the engine explicitly; there is no hidden RNG state.

#include <cstdint>
#include <random>

#include "qmat.hpp"

namespace rtd {

using Rng = std::mt19937_64;

/// Haar-random unit vector.
ComplexVector random_unit_vector(std::size_t d, Rng& rng);
WeightedPureState random_pure_state(const Dims& dims, Rng& rng);
/// Ginibre-induced mixed state of the given rank (0 = full rank).
DensityOperator random_mixed_state(const Dims& dims, Rng& rng, std::size_t rank = 0);
/// Uniform point on the probability simplex.
RealVector random_probability(std::size_t d, Rng& rng);
/// Haar-random unitary via QR of a Ginibre matrix.
ComplexMatrix random_unitary(std::size_t d, Rng& rng);

}  // namespace rtd
