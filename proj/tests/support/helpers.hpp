#pragma once

#include <cmath>
#include <complex>
#include <initializer_list>

#include "qmat.hpp"

namespace testing {

using rtd::cplx;

inline rtd::WeightedPureState pure(std::initializer_list<double> amps, rtd::Dims dims = {}) {
  rtd::ComplexVector v(static_cast<Eigen::Index>(amps.size()));
  Eigen::Index i = 0;
  for (double a : amps) v(i++) = a;
  return rtd::WeightedPureState(v, dims);
}

inline rtd::DensityOperator diag(std::initializer_list<double> p) {
  rtd::ComplexMatrix m = rtd::ComplexMatrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p) m(i, i) = x, ++i;
  return rtd::DensityOperator(m, {p.size()});
}

/// sqrt(0.8)|0> + sqrt(0.2)|1>.
inline rtd::WeightedPureState psi82() { return pure({std::sqrt(0.8), std::sqrt(0.2)}); }

/// sqrt(0.8)|00> + sqrt(0.2)|11>.
inline rtd::WeightedPureState psi82_ab() { return pure({std::sqrt(0.8), 0, 0, std::sqrt(0.2)}, {2, 2}); }

/// Flat Schmidt state of rank r on r x r.
inline rtd::WeightedPureState flat_schmidt(std::size_t r) { return rtd::maximally_entangled(r); }

}  // namespace testing
