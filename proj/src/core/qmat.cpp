#include "qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace rtd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::BadFactorIndex: return "BadFactorIndex";
    case ErrorCode::UnsupportedInput: return "UnsupportedInput";
    case ErrorCode::DeltaNegative: return "DeltaNegative";
    case ErrorCode::HypothesisNotMet: return "HypothesisNotMet";
    case ErrorCode::NotExact: return "NotExact";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, std::abs(m(i, j)));
  return best;
}

double off_diagonal_norm2(const ComplexMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return s;
}

// Row-major multi-index tables: full[k * traced + t] is the flat index of
// kept-index k combined with traced-index t.
struct FactorSplit {
  std::size_t kept = 1;
  std::size_t traced = 1;
  Dims kept_dims;
  std::vector<std::size_t> full;
};

FactorSplit split_factors(const Dims& dims, std::span<const std::size_t> keep_in) {
  std::vector<std::size_t> keep(keep_in.begin(), keep_in.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (auto k : keep)
    if (k >= dims.size()) {
      std::ostringstream os;
      os << "factor index " << k << " out of range for " << dims.size() << " factors";
      fail(ErrorCode::BadFactorIndex, os.str());
    }
  std::vector<bool> is_kept(dims.size(), false);
  for (auto k : keep) is_kept[k] = true;

  FactorSplit split;
  for (std::size_t f = 0; f < dims.size(); ++f) {
    if (is_kept[f]) {
      split.kept *= dims[f];
      split.kept_dims.push_back(dims[f]);
    } else {
      split.traced *= dims[f];
    }
  }
  const std::size_t total = product(dims);
  split.full.assign(total, 0);
  std::vector<std::size_t> digits(dims.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t k = 0, t = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
      if (is_kept[f]) k = k * dims[f] + digits[f];
      else t = t * dims[f] + digits[f];
    }
    split.full[k * split.traced + t] = flat;
    for (std::size_t f = dims.size(); f-- > 0;) {
      if (++digits[f] < dims[f]) break;
      digits[f] = 0;
    }
  }
  return split;
}

}  // namespace

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol * scale) return false;
  return true;
}

void require_finite(const ComplexMatrix& m, const char* what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        fail(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

EigenSystem herm_eig(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "herm_eig: matrix not square");
  if (!is_hermitian(m, tol)) fail(ErrorCode::NotHermitian, "herm_eig: matrix not Hermitian");
  const Eigen::Index n = m.rows();
  ComplexMatrix a = 0.5 * (m + m.adjoint());
  ComplexMatrix v = ComplexMatrix::Identity(n, n);

  const double total = a.squaredNorm();
  const double stop = total * 1e-32;
  for (int sweep = 0; sweep < 100 && off_diagonal_norm2(a) > stop; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double b = std::abs(apq);
        if (b <= 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const cplx phase = apq / b;  // a_pq = b e^{i phi}
        const double tau = (aqq - app) / (2.0 * b);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // G = D R with D = diag(1, e^{-i phi}), R = [[c, s], [-s, c]].
        const cplx g_pp = c;
        const cplx g_pq = s;
        const cplx g_qp = -s * std::conj(phase);
        const cplx g_qq = c * std::conj(phase);
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * g_pp + akq * g_qp;
          a(k, q) = akp * g_pq + akq * g_qq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
          a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * g_pp + vkq * g_qp;
          v(k, q) = vkp * g_pq + vkq * g_qq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
  EigenSystem out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

double lambda_max(const ComplexMatrix& m) { return herm_eig(m).values(0); }

double lambda_min(const ComplexMatrix& m) {
  auto e = herm_eig(m);
  return e.values(e.values.size() - 1);
}

ComplexMatrix sqrtm_psd(const ComplexMatrix& m, double tol) {
  auto e = herm_eig(m, tol);
  const double scale = std::max(1.0, std::abs(e.values(0)));
  RealVector r(e.values.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double x = e.values(i);
    if (x < -tol * scale) fail(ErrorCode::NotPSD, "sqrtm_psd: matrix has a negative eigenvalue");
    r(i) = x > 0 ? std::sqrt(x) : 0.0;
  }
  return e.vectors * r.asDiagonal() * e.vectors.adjoint();
}

double trace_norm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "trace_norm: matrix not square");
  if (is_hermitian(m, 1e-12)) return herm_eig(m, 1e-12).values.cwiseAbs().sum();
  auto e = herm_eig(m.adjoint() * m, 1e-9);
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) s += std::sqrt(std::max(0.0, e.values(i)));
  return s;
}

DensityOperator::DensityOperator(ComplexMatrix matrix, Dims dims, double tol)
    : matrix_(std::move(matrix)), dims_(std::move(dims)), tol_(tol) {
  if (matrix_.rows() != matrix_.cols())
    fail(ErrorCode::DimensionMismatch, "density operator must be square");
  if (dims_.empty()) dims_ = {static_cast<std::size_t>(matrix_.rows())};
  if (product(dims_) != static_cast<std::size_t>(matrix_.rows()))
    fail(ErrorCode::DimensionMismatch, "product of dims does not match matrix dimension");
  require_finite(matrix_, "density operator");
  if (!is_hermitian(matrix_, tol_)) fail(ErrorCode::NotHermitian, "density operator is not Hermitian");
  matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
  if (std::abs(matrix_.trace().real() - 1.0) > tol_)
    fail(ErrorCode::InvalidArgument, "density operator trace is not 1");
  if (lambda_min(matrix_) < -tol_) fail(ErrorCode::NotPSD, "density operator is not PSD");
}

DensityOperator DensityOperator::maximally_mixed(const Dims& dims) {
  const auto d = static_cast<Eigen::Index>(product(dims));
  return DensityOperator(ComplexMatrix::Identity(d, d) / static_cast<double>(d), dims);
}

DensityOperator DensityOperator::basis_projector(const Dims& dims, std::size_t index) {
  const auto d = static_cast<Eigen::Index>(product(dims));
  if (static_cast<Eigen::Index>(index) >= d) fail(ErrorCode::InvalidArgument, "basis index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityOperator(std::move(m), dims);
}

WeightedPureState::WeightedPureState(ComplexVector vector, Dims dims, double weight)
    : vector_(std::move(vector)), dims_(std::move(dims)), weight_(weight) {
  if (dims_.empty()) dims_ = {static_cast<std::size_t>(vector_.size())};
  if (product(dims_) != static_cast<std::size_t>(vector_.size()))
    fail(ErrorCode::DimensionMismatch, "product of dims does not match vector length");
  for (Eigen::Index i = 0; i < vector_.size(); ++i)
    if (!std::isfinite(vector_(i).real()) || !std::isfinite(vector_(i).imag()))
      fail(ErrorCode::InvalidArgument, "pure state has non-finite amplitudes");
  if (std::abs(vector_.norm() - 1.0) > 1e-12)
    fail(ErrorCode::InvalidArgument, "pure state vector is not normalized");
  if (!(weight_ > 0.0 && weight_ <= 1.0)) fail(ErrorCode::InvalidArgument, "weight must lie in (0, 1]");
}

ComplexMatrix WeightedPureState::projector() const {
  return weight_ * vector_ * vector_.adjoint();
}

DensityOperator WeightedPureState::density() const {
  return DensityOperator(vector_ * vector_.adjoint(), dims_);
}

WeightedPureState maximally_coherent(std::size_t d) {
  ComplexVector v = ComplexVector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(double(d)));
  return WeightedPureState(std::move(v), {d});
}

WeightedPureState maximally_entangled(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexVector v = ComplexVector::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) v(i * n + i) = 1.0 / std::sqrt(double(d));
  return WeightedPureState(std::move(v), {d, d});
}

namespace {
Dims concat(const Dims& a, const Dims& b) {
  Dims out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void require_bipartite(const Dims& dims) {
  if (dims.size() != 2) fail(ErrorCode::DimensionMismatch, "expected a bipartite [dA, dB] state");
}
}  // namespace

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  ComplexMatrix k = Eigen::kroneckerProduct(a.matrix(), b.matrix());
  return DensityOperator(std::move(k), concat(a.dims(), b.dims()), std::max(a.tol(), b.tol()));
}

WeightedPureState tensor(const WeightedPureState& a, const WeightedPureState& b) {
  ComplexVector v(a.vector().size() * b.vector().size());
  for (Eigen::Index i = 0; i < a.vector().size(); ++i)
    v.segment(i * b.vector().size(), b.vector().size()) = a.vector()(i) * b.vector();
  return WeightedPureState(v.normalized(), concat(a.dims(), b.dims()), a.weight() * b.weight());
}

WeightedPureState tensor_bipartite(const WeightedPureState& a, const WeightedPureState& b) {
  require_bipartite(a.dims());
  require_bipartite(b.dims());
  const auto a1 = static_cast<Eigen::Index>(a.dims()[0]), b1 = static_cast<Eigen::Index>(a.dims()[1]);
  const auto a2 = static_cast<Eigen::Index>(b.dims()[0]), b2 = static_cast<Eigen::Index>(b.dims()[1]);
  const Eigen::Index db = b1 * b2;
  ComplexVector v(a1 * a2 * db);
  for (Eigen::Index i1 = 0; i1 < a1; ++i1)
    for (Eigen::Index j1 = 0; j1 < b1; ++j1)
      for (Eigen::Index i2 = 0; i2 < a2; ++i2)
        for (Eigen::Index j2 = 0; j2 < b2; ++j2)
          v((i1 * a2 + i2) * db + (j1 * b2 + j2)) = a.vector()(i1 * b1 + j1) * b.vector()(i2 * b2 + j2);
  return WeightedPureState(v.normalized(), {a.dims()[0] * b.dims()[0], a.dims()[1] * b.dims()[1]},
                           a.weight() * b.weight());
}

DensityOperator tensor_bipartite(const DensityOperator& a, const DensityOperator& b) {
  require_bipartite(a.dims());
  require_bipartite(b.dims());
  // Kronecker product in (A1 B1 A2 B2) order, then permute to (A1 A2 B1 B2).
  ComplexMatrix k = Eigen::kroneckerProduct(a.matrix(), b.matrix());
  const std::size_t a1 = a.dims()[0], b1 = a.dims()[1], a2 = b.dims()[0], b2 = b.dims()[1];
  const std::size_t n = a1 * b1 * a2 * b2;
  std::vector<Eigen::Index> perm(n);
  for (std::size_t i1 = 0; i1 < a1; ++i1)
    for (std::size_t j1 = 0; j1 < b1; ++j1)
      for (std::size_t i2 = 0; i2 < a2; ++i2)
        for (std::size_t j2 = 0; j2 < b2; ++j2)
          perm[((i1 * b1 + j1) * a2 + i2) * b2 + j2] =
              static_cast<Eigen::Index>((i1 * a2 + i2) * (b1 * b2) + (j1 * b2 + j2));
  ComplexMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out(perm[r], perm[c]) = k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return DensityOperator(std::move(out), {a1 * a2, b1 * b2}, std::max(a.tol(), b.tol()));
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep) {
  const auto split = split_factors(rho.dims(), keep);
  const auto nk = static_cast<Eigen::Index>(split.kept);
  ComplexMatrix out = ComplexMatrix::Zero(nk, nk);
  const auto& m = rho.matrix();
  for (std::size_t k1 = 0; k1 < split.kept; ++k1)
    for (std::size_t k2 = 0; k2 < split.kept; ++k2) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < split.traced; ++t)
        s += m(static_cast<Eigen::Index>(split.full[k1 * split.traced + t]),
               static_cast<Eigen::Index>(split.full[k2 * split.traced + t]));
      out(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) = s;
    }
  Dims kd = split.kept_dims.empty() ? Dims{1} : split.kept_dims;
  return DensityOperator(std::move(out), std::move(kd), rho.tol());
}

DensityOperator partial_trace(const WeightedPureState& psi, std::span<const std::size_t> keep) {
  const auto split = split_factors(psi.dims(), keep);
  ComplexMatrix amp(static_cast<Eigen::Index>(split.kept), static_cast<Eigen::Index>(split.traced));
  for (std::size_t k = 0; k < split.kept; ++k)
    for (std::size_t t = 0; t < split.traced; ++t)
      amp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
          psi.vector()(static_cast<Eigen::Index>(split.full[k * split.traced + t]));
  Dims kd = split.kept_dims.empty() ? Dims{1} : split.kept_dims;
  return DensityOperator(amp * amp.adjoint(), std::move(kd));
}

ComplexMatrix partial_transpose_b(const ComplexMatrix& m, const Dims& dims) {
  require_bipartite(dims);
  const auto da = static_cast<Eigen::Index>(dims[0]), db = static_cast<Eigen::Index>(dims[1]);
  if (m.rows() != da * db || m.cols() != da * db)
    fail(ErrorCode::DimensionMismatch, "partial transpose: dims do not match matrix");
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < db; ++j)
      for (Eigen::Index k = 0; k < da; ++k)
        for (Eigen::Index l = 0; l < db; ++l) out(i * db + j, k * db + l) = m(i * db + l, k * db + j);
  return out;
}

DensityOperator dephase(const DensityOperator& rho) {
  ComplexMatrix d = rho.matrix().diagonal().asDiagonal();
  return DensityOperator(std::move(d), rho.dims(), rho.tol());
}

RealVector dephase(const WeightedPureState& psi) {
  return psi.weight() * psi.vector().cwiseAbs2();
}

namespace {
void require_unit_bounded(const ComplexMatrix& x, double tol, const char* what) {
  if (!is_hermitian(x, tol)) fail(ErrorCode::NotHermitian, std::string(what) + " is not Hermitian");
  auto e = herm_eig(x, tol);
  if (e.values(e.values.size() - 1) < -tol || e.values(0) > 1.0 + tol)
    fail(ErrorCode::NotPSD, std::string(what) + " is not between 0 and I");
}
}  // namespace

double fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma, double tol) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    fail(ErrorCode::DimensionMismatch, "fidelity: operand dimensions differ");
  require_unit_bounded(rho, tol, "fidelity argument");
  require_unit_bounded(sigma, tol, "fidelity argument");
  const ComplexMatrix rs = sqrtm_psd(sigma, tol);
  ComplexMatrix inner = rs * rho * rs;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  auto e = herm_eig(inner, 1e-8);
  double f = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) f += std::sqrt(std::max(0.0, e.values(i)));
  return f;
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  return std::min(1.0, fidelity(rho.matrix(), sigma.matrix(), std::max(rho.tol(), sigma.tol())));
}

double fidelity(const DensityOperator& rho, const WeightedPureState& phi) {
  if (rho.dim() != phi.dim()) fail(ErrorCode::DimensionMismatch, "fidelity: dimension mismatch");
  const double v = (phi.vector().adjoint() * rho.matrix() * phi.vector())(0, 0).real();
  return std::sqrt(std::max(0.0, phi.weight() * v));
}

Schmidt schmidt(const WeightedPureState& psi) {
  require_bipartite(psi.dims());
  const auto da = static_cast<Eigen::Index>(psi.dims()[0]), db = static_cast<Eigen::Index>(psi.dims()[1]);
  ComplexMatrix amp(da, db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < db; ++j) amp(i, j) = psi.vector()(i * db + j);
  auto e = herm_eig(amp * amp.adjoint(), 1e-9);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    if (e.values(k) > 1e-28) ++rank;
  Schmidt out{RealVector(rank), ComplexMatrix(da, rank), ComplexMatrix(db, rank)};
  for (Eigen::Index k = 0; k < rank; ++k) {
    const double s = std::sqrt(e.values(k));
    out.coefficients(k) = s;
    out.left.col(k) = e.vectors.col(k);
    out.right.col(k) = (amp.transpose() * e.vectors.col(k).conjugate()) / s;
  }
  return out;
}

bool is_pure(const DensityOperator& rho, double tol) {
  return lambda_max(rho.matrix()) >= 1.0 - tol;
}

WeightedPureState to_pure(const DensityOperator& rho) {
  auto e = herm_eig(rho.matrix(), rho.tol());
  ComplexVector v = e.vectors.col(0);
  // Fix the global phase: largest-magnitude amplitude real positive.
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best)) + 1e-12) best = i;
  v *= std::conj(v(best)) / std::abs(v(best));
  return WeightedPureState(v.normalized(), rho.dims());
}

}  // namespace rtd
