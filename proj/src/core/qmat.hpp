#pragma once

// Dense complex matrix kernel: Hermitian eigensolver, tensor products,
// partial traces, dephasing, fidelity and trace norm.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace rtd {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Tolerance for structural invariants (hermiticity, trace, PSD).
inline constexpr double kStructTol = 1e-9;
/// Tolerance for optimizer outputs.
inline constexpr double kOptTol = 1e-6;

std::size_t product(const Dims& dims);

/// Eigenvalues sorted descending, eigenvectors as orthonormal columns.
struct EigenSystem {
  RealVector values;
  ComplexMatrix vectors;
};

/// Cyclic Jacobi eigensolver for Hermitian matrices. Sweeps pairs (p, q) in
/// row-major order, so results are bit-reproducible for a given input.
EigenSystem herm_eig(const ComplexMatrix& m, double tol = kStructTol);

double lambda_max(const ComplexMatrix& m);
double lambda_min(const ComplexMatrix& m);

bool is_hermitian(const ComplexMatrix& m, double tol = kStructTol);
void require_finite(const ComplexMatrix& m, const char* what);

/// Hermitian square root of a PSD matrix; eigenvalues in [-tol, 0) are
/// clamped to zero, anything more negative raises NotPSD.
ComplexMatrix sqrtm_psd(const ComplexMatrix& m, double tol = kStructTol);

/// Sum of singular values.
double trace_norm(const ComplexMatrix& m);

/// Hermitian, PSD, unit-trace operator with tensor-factor metadata.
class DensityOperator {
 public:
  DensityOperator(ComplexMatrix matrix, Dims dims, double tol = kStructTol);

  static DensityOperator maximally_mixed(const Dims& dims);
  static DensityOperator basis_projector(const Dims& dims, std::size_t index);

  const ComplexMatrix& matrix() const { return matrix_; }
  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  double tol() const { return tol_; }

 private:
  ComplexMatrix matrix_;
  Dims dims_;
  double tol_;
};

/// Unit vector with a weight w in (0, 1]; represents the operator w |v><v|.
class WeightedPureState {
 public:
  WeightedPureState(ComplexVector vector, Dims dims, double weight = 1.0);

  const ComplexVector& vector() const { return vector_; }
  const Dims& dims() const { return dims_; }
  double weight() const { return weight_; }
  std::size_t dim() const { return static_cast<std::size_t>(vector_.size()); }

  /// w |v><v| as a dense matrix.
  ComplexMatrix projector() const;
  /// The normalized state |v><v|.
  DensityOperator density() const;

 private:
  ComplexVector vector_;
  Dims dims_;
  double weight_;
};

/// Uniform superposition over d levels.
WeightedPureState maximally_coherent(std::size_t d);
/// (1/sqrt d) sum_i |ii> on a d x d system.
WeightedPureState maximally_entangled(std::size_t d);

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
WeightedPureState tensor(const WeightedPureState& a, const WeightedPureState& b);

/// Tensor product of two bipartite states that regroups factors as
/// (A1 A2) : (B1 B2), keeping the result bipartite.
WeightedPureState tensor_bipartite(const WeightedPureState& a, const WeightedPureState& b);
DensityOperator tensor_bipartite(const DensityOperator& a, const DensityOperator& b);

/// Trace out every factor not listed in keep.
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep);
/// Reduced state of a pure state, computed from the amplitudes directly.
DensityOperator partial_trace(const WeightedPureState& psi, std::span<const std::size_t> keep);

/// Partial transpose on the second factor of a bipartite [dA, dB] operator.
ComplexMatrix partial_transpose_b(const ComplexMatrix& m, const Dims& dims);

/// Completely dephased state in the computational basis.
DensityOperator dephase(const DensityOperator& rho);
RealVector dephase(const WeightedPureState& psi);

/// Tr sqrt(sqrt(sigma) rho sqrt(sigma)) for operators with 0 <= X <= I.
double fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma, double tol = kStructTol);
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
/// sqrt(<phi| rho |phi>) times sqrt(weight of phi).
double fidelity(const DensityOperator& rho, const WeightedPureState& phi);

/// Schmidt decomposition of a bipartite pure state |psi> = sum_i s_i |u_i>|w_i>.
struct Schmidt {
  RealVector coefficients;  // descending, nonnegative
  ComplexMatrix left;       // columns u_i (dA x r)
  ComplexMatrix right;      // columns w_i (dB x r)
};
Schmidt schmidt(const WeightedPureState& psi);

/// Rank-one test: largest eigenvalue within tol of the trace.
bool is_pure(const DensityOperator& rho, double tol = kStructTol);
/// Dominant eigenvector of a (numerically) pure density operator.
WeightedPureState to_pure(const DensityOperator& rho);

}  // namespace rtd
