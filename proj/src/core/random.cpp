#include "random.hpp"

#include <cmath>

namespace rtd {

ComplexVector random_unit_vector(std::size_t d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexVector v(static_cast<Eigen::Index>(d));
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

WeightedPureState random_pure_state(const Dims& dims, Rng& rng) {
  return WeightedPureState(random_unit_vector(product(dims), rng), dims);
}

DensityOperator random_mixed_state(const Dims& dims, Rng& rng, std::size_t rank) {
  const auto d = static_cast<Eigen::Index>(product(dims));
  const auto r = static_cast<Eigen::Index>(rank == 0 ? product(dims) : rank);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(d, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < d; ++i) a(i, j) = cplx(g(rng), g(rng));
  ComplexMatrix m = a * a.adjoint();
  m /= m.trace().real();
  return DensityOperator(std::move(m), dims);
}

RealVector random_probability(std::size_t d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RealVector p(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = e(rng);
  return p / p.sum();
}

ComplexMatrix random_unitary(std::size_t d, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx di = r(i, i);
    if (std::abs(di) > 0) q.col(i) *= di / std::abs(di);
  }
  return q;
}

}  // namespace rtd
