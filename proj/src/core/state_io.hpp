#pragma once

// JSON state files:
//   {"dims": [2, 2], "kind": "pure", "vector": [[re, im], ...], "weight": 1}
//   {"dims": [2], "kind": "mixed", "matrix": [[[re, im], ...], ...]}
// Doubles are written in shortest round-trip form, so parse -> serialize ->
// parse reproduces the matrices bit for bit.

#include <optional>
#include <string>

#include "qmat.hpp"

namespace rtd {

struct StateData {
  Dims dims;
  /// Present for "kind": "pure".
  std::optional<WeightedPureState> pure;
  DensityOperator density;
};

/// Pure vectors off unit norm by more than 1e-12 are renormalized.
StateData parse_state(const std::string& json_text);
StateData load_state(const std::string& path);

std::string serialize_state(const StateData& state);
std::string serialize_state(const WeightedPureState& psi);
std::string serialize_state(const DensityOperator& rho);

StateData make_state(const WeightedPureState& psi);
StateData make_state(const DensityOperator& rho);

}  // namespace rtd
