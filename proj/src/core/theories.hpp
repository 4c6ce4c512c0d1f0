#pragma once

// Free-state sets for the three shipped resource theories: coherence
// (diagonal states), bipartite entanglement (separable states, tested through
// the PPT criterion) and purity (the maximally mixed state only).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmat.hpp"

namespace rtd {

enum class TheoryKind { Coherence, Entanglement, Purity };

const char* to_string(TheoryKind kind) noexcept;
TheoryKind parse_theory_kind(const std::string& name);

struct Capabilities {
  bool exact_membership = false;
  bool overlap_closed_form_pure = false;
  bool extreme_points_enumerable = false;
  /// Membership is a necessary-condition surrogate (PPT for separability).
  bool membership_is_relaxation = false;
};

class TheoryDescriptor {
 public:
  TheoryDescriptor(TheoryKind kind, Dims dims);

  TheoryKind kind() const { return kind_; }
  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return product(dims_); }
  const Capabilities& capabilities() const { return caps_; }

  /// Same theory on a different system, e.g. a tensor power.
  TheoryDescriptor on(const Dims& dims) const { return TheoryDescriptor(kind_, dims); }

 private:
  TheoryKind kind_;
  Dims dims_;
  Capabilities caps_;
};

/// Theory descriptor matched to a state's own dims.
TheoryDescriptor theory_for(TheoryKind kind, const Dims& dims);

struct MembershipVerdict {
  bool member = false;
  /// coherence: largest off-diagonal magnitude; purity: Frobenius distance
  /// to I/d; entanglement: smallest partial-transpose eigenvalue.
  double certificate = 0.0;
  bool relaxation = false;
};

MembershipVerdict is_free(const TheoryDescriptor& theory, const DensityOperator& rho,
                          double tol = kStructTol);

struct Overlap {
  double value;
  DensityOperator argmax;
};

/// sup over free gamma of Tr(rho gamma), with an achieving free state.
Overlap max_overlap(const TheoryDescriptor& theory, const DensityOperator& rho);
/// Same for w |v><v|; the value carries the weight.
Overlap max_overlap(const TheoryDescriptor& theory, const WeightedPureState& psi);

/// Extreme points of F. Coherence and purity enumerate them; entanglement
/// returns `sample_size` product pure states from a seeded Halton sequence.
std::vector<DensityOperator> extreme_free_states(const TheoryDescriptor& theory,
                                                 std::size_t sample_size = 0,
                                                 std::uint64_t seed = 0);

DensityOperator random_free_state(const TheoryDescriptor& theory, std::uint64_t seed);

/// m-fold tensor power respecting the theory's factor grouping.
WeightedPureState tensor_power(const TheoryDescriptor& theory, const WeightedPureState& phi,
                               std::size_t m);
DensityOperator tensor_power(const TheoryDescriptor& theory, const DensityOperator& rho,
                             std::size_t m);

/// The unit resource state of a theory on local dimension d: the uniform
/// superposition (coherence), the maximally entangled d x d state
/// (entanglement) or |0> (purity).
WeightedPureState unit_state(TheoryKind kind, std::size_t d = 2);

}  // namespace rtd
