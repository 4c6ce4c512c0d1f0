#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace rtd {

namespace {

// Calls f on every composition of `total` into `parts` nonnegative integers,
// in lexicographic order.
template <class F>
void for_each_composition(std::size_t parts, std::size_t total, F&& f) {
  std::vector<std::size_t> c(parts, 0);
  auto rec = [&](auto& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == parts) {
      c[i] = left;
      f(c);
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      c[i] = k;
      self(self, i + 1, left - k);
    }
  };
  rec(rec, 0, total);
}

double eigen_lambda_max(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// lambda_max(P^{-1/2} rho P^{-1/2}): the smallest T with T diag(p) >= rho.
double majorizer_scale(const ComplexMatrix& rho, const RealVector& p) {
  const auto d = rho.rows();
  RealVector inv(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (p(i) <= 0) {
      if (rho.row(i).norm() > 1e-14) return kInf;
      inv(i) = 0.0;
    } else {
      inv(i) = 1.0 / std::sqrt(p(i));
    }
  }
  const ComplexMatrix scaled = inv.cast<cplx>().asDiagonal() * rho * inv.cast<cplx>().asDiagonal();
  return eigen_lambda_max(scaled);
}

ComplexVector angle_vector(std::size_t d, double t1, double t2, const ComplexVector& phases) {
  ComplexVector v(static_cast<Eigen::Index>(d));
  if (d == 2) {
    v << std::cos(t1), std::sin(t1) * phases(1);
  } else {
    v << std::cos(t1), std::sin(t1) * std::cos(t2) * phases(1), std::sin(t1) * std::sin(t2) * phases(2);
  }
  return v;
}

double vector_free_overlap(const TheoryDescriptor& theory, const ComplexVector& v) {
  return theory.kind() == TheoryKind::Coherence ? v.cwiseAbs2().maxCoeff() : 1.0 / double(theory.dim());
}

// Smallest grid weight w with w * q >= need2; grid is {1e-6} U {k / res^2}.
double smallest_feasible_weight(double q, double need2, std::size_t res) {
  constexpr double kFloor = 1e-6;
  if (q <= 0) return kInf;
  const double w_min = need2 / q;
  if (w_min > 1.0 + 1e-15) return kInf;
  if (w_min <= kFloor) return kFloor;
  const std::size_t n = res * res;
  std::size_t lo = 1, hi = n;  // binary search over k / n
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (double(mid) / double(n) * q >= need2) hi = mid;
    else lo = mid + 1;
  }
  return double(lo) / double(n);
}

// Pure-vector parameterization for d <= 3. For d = 2, (a, b) are the polar
// angle in [0, pi/2] and the relative phase in [0, 2 pi); for d = 3 both are
// polar angles in [0, pi/2] and the phases are copied from the dominant
// eigenvector of rho.
struct VectorGrid {
  std::size_t d;
  ComplexVector ph;
  double b_max;

  // magnitudes_only drops the d = 2 phase axis and the d = 3 phases.
  VectorGrid(const DensityOperator& rho, bool magnitudes_only) : d(rho.dim()), ph(ComplexVector::Ones(3)) {
    b_max = d == 2 ? (magnitudes_only ? 0.0 : 2.0 * std::numbers::pi) : 0.5 * std::numbers::pi;
    if (d != 3 || magnitudes_only) return;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
    const ComplexVector top = es.eigenvectors().col(2);
    Eigen::Index ref = 0;
    top.cwiseAbs().maxCoeff(&ref);
    const cplx g = std::abs(top(ref)) > 0 ? std::conj(top(ref)) / std::abs(top(ref)) : cplx(1.0);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const cplx z = top(i) * g;
      ph(i) = std::abs(z) > 1e-14 ? z / std::abs(z) : cplx(1.0);
    }
  }

  ComplexVector at(double a, double b) const {
    if (d == 2) {
      ComplexVector p(2);
      p << 1.0, std::polar(1.0, b);
      return angle_vector(2, a, 0.0, p);
    }
    return angle_vector(3, a, b, ComplexVector::Ones(3)).cwiseProduct(ph);
  }
};

// Maximizes score(v) over the vector grid at resolution res, then regrids a
// shrinking box around the incumbent.
template <class F>
double grid_maximize(const DensityOperator& rho, std::size_t res, F&& score, bool magnitudes_only = false) {
  const VectorGrid g(rho, magnitudes_only);
  const double a_max = 0.5 * std::numbers::pi;
  const std::size_t nb = g.d == 2 ? (magnitudes_only ? 1 : res) : res + 1;
  double best = -kInf, best_a = 0.0, best_b = 0.0;
  for (std::size_t i = 0; i <= res; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const double a = a_max * double(i) / double(res), b = g.b_max * double(j) / double(res);
      const double v = score(g.at(a, b));
      if (v > best) best = v, best_a = a, best_b = b;
    }
  if (!std::isfinite(best)) return best;
  constexpr std::size_t kZoom = 16;
  double ha = a_max / double(res), hb = g.b_max / double(res);
  for (int round = 0; round < 40; ++round) {
    const double ca = best_a, cb = best_b;
    for (std::size_t i = 0; i <= kZoom; ++i)
      for (std::size_t j = 0; j <= kZoom; ++j) {
        const double a = std::clamp(ca + ha * (2.0 * double(i) / kZoom - 1.0), 0.0, a_max);
        const double b = std::clamp(cb + hb * (2.0 * double(j) / kZoom - 1.0), 0.0, g.b_max);
        const double v = score(g.at(a, b));
        if (v > best) best = v, best_a = a, best_b = b;
      }
    ha *= 0.5;
    hb *= 0.5;
  }
  return best;
}

// Calls f(v) over the plain vector grid (no refinement).
template <class F>
void for_each_grid_vector(const DensityOperator& rho, std::size_t res, F&& f) {
  grid_maximize(rho, res, [&](const ComplexVector& v) {
    f(v);
    return -kInf;
  });
}

}  // namespace

double grid_g_min(const TheoryDescriptor& theory, const DensityOperator& rho, std::size_t resolution) {
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  if (theory.kind() == TheoryKind::Entanglement || rho.dim() > 4)
    fail(ErrorCode::UnsupportedInput, "grid_g_min covers coherence and purity with d <= 4");
  if (theory.kind() == TheoryKind::Purity) {
    const double ov = rho.matrix().trace().real() / double(rho.dim());
    return -std::log2(ov);
  }
  const std::size_t res = std::max<std::size_t>(1, resolution);
  const RealVector diag = rho.matrix().diagonal().real();
  double best = 0.0;
  for_each_composition(rho.dim(), res, [&](const std::vector<std::size_t>& c) {
    double ov = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) ov += diag(static_cast<Eigen::Index>(i)) * double(c[i]);
    best = std::max(best, ov / double(res));
  });
  return -std::log2(best);
}

double grid_smoothed_g_min(const TheoryDescriptor& theory, const DensityOperator& rho, double epsilon,
                           BallKind ball, std::size_t resolution) {
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  if (theory.kind() == TheoryKind::Entanglement || rho.dim() > 3 || rho.dim() < 2)
    fail(ErrorCode::UnsupportedInput, "grid_smoothed_g_min covers coherence and purity with 2 <= d <= 3");
  if (!(epsilon >= 0.0) || epsilon > 1.0) fail(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");
  const std::size_t res = std::max<std::size_t>(2, resolution);
  if (epsilon == 0.0) {
    if (ball == BallKind::Pure && !is_pure(rho, 1e-10)) return 0.0;
    return grid_g_min(theory, rho, res);
  }

  const double need2 = (1.0 - epsilon) * (1.0 - epsilon);
  const ComplexMatrix& m = rho.matrix();
  double best = grid_maximize(rho, res, [&](const ComplexVector& v) {
    const double q = (v.adjoint() * m * v)(0, 0).real();
    const double w = smallest_feasible_weight(q, need2, res);
    return std::isfinite(w) ? -std::log2(w * vector_free_overlap(theory, v)) : -kInf;
  });

  if (ball == BallKind::General) {
    // w [(1-p) rho + p |v><v|] with the weight fixed by the fidelity constraint.
    const std::size_t coarse = std::max<std::size_t>(4, res / 10), steps = std::max<std::size_t>(4, res / 20);
    const RealVector diag = m.diagonal().real();
    for_each_grid_vector(rho, coarse, [&](const ComplexVector& v) {
      const ComplexMatrix proj = v * v.adjoint();
      for (std::size_t k = 0; k <= steps; ++k) {
        const double p = double(k) / double(steps);
        const ComplexMatrix x = (1.0 - p) * m + p * proj;
        const double f = fidelity(x, m);
        const double w = f > 0 ? need2 / (f * f) : kInf;
        if (w > 1.0 + 1e-12) continue;
        const double ov = theory.kind() == TheoryKind::Coherence ? x.diagonal().real().maxCoeff()
                                                                 : 1.0 / double(theory.dim());
        best = std::max(best, -std::log2(w * ov));
      }
    });
  }
  if (ball == BallKind::General && theory.kind() == TheoryKind::Coherence) {
    // D rho D over a grid of nonnegative diagonal rescalings: magnitudes y on
    // the sphere, d_i = y_i / sqrt(rho_ii), then the smallest grid scale s
    // (step 1/res^2) with s F >= 1 - eps and s^2 Tr X <= 1.
    const RealVector diag = m.diagonal().real();
    const std::size_t n = res * res;
    grid_maximize(rho, res, [&](const ComplexVector& v) {
      RealVector dvec = RealVector::Zero(diag.size());
      for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (diag(i) > 1e-15) dvec(i) = std::abs(v(i)) / std::sqrt(diag(i));
      const auto dd = dvec.cast<cplx>().asDiagonal();
      const ComplexMatrix x = dd * m * dd;
      const double f = fidelity(x, m), tr = x.trace().real();
      if (f <= 0) return -kInf;
      const double s_min = (1.0 - epsilon) / f;
      const double s = std::ceil(s_min * double(n)) / double(n);
      if (s * s * tr > 1.0 + 1e-12) return -kInf;
      const double value = -std::log2(s * s * x.diagonal().real().maxCoeff());
      best = std::max(best, value);
      return value;
    }, true);
  }
  return std::isfinite(best) ? best : 0.0;
}

double grid_global_robustness(const TheoryDescriptor& theory, const DensityOperator& rho, std::size_t resolution) {
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  const auto d = rho.dim();
  const ComplexMatrix& m = rho.matrix();
  if (theory.kind() == TheoryKind::Purity) {
    // Smallest mu with mu I - rho PSD, by bisection on a Cholesky test.
    double lo = 0.0, hi = 1.0 + 1e-12;
    const ComplexMatrix id = ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      Eigen::LLT<ComplexMatrix> llt((mid + 1e-15) * id - m);
      (llt.info() == Eigen::Success ? hi : lo) = mid;
    }
    return std::max(0.0, double(d) * hi - 1.0);
  }
  if (theory.kind() != TheoryKind::Coherence || d > 3)
    fail(ErrorCode::UnsupportedInput, "grid_global_robustness covers coherence d <= 3 and purity");

  const std::size_t res = std::max<std::size_t>(2, resolution);
  RealVector best_p = RealVector::Constant(static_cast<Eigen::Index>(d), 1.0 / double(d));
  double best = majorizer_scale(m, best_p);
  for_each_composition(d, res, [&](const std::vector<std::size_t>& c) {
    RealVector p(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) p(static_cast<Eigen::Index>(i)) = double(c[i]) / double(res);
    const double t = majorizer_scale(m, p);
    if (t < best) {
      best = t;
      best_p = p;
    }
  });
  // Zoom: regrid a shrinking box around the incumbent.
  double half = 1.0 / double(res);
  constexpr std::size_t kZoom = 24;
  for (int round = 0; round < 30; ++round) {
    const RealVector centre = best_p;
    for (std::size_t a = 0; a <= kZoom; ++a)
      for (std::size_t b = 0; b <= (d == 3 ? kZoom : 0); ++b) {
        RealVector p = centre;
        p(0) += half * (2.0 * double(a) / kZoom - 1.0);
        if (d == 3) p(1) += half * (2.0 * double(b) / kZoom - 1.0);
        p(static_cast<Eigen::Index>(d) - 1) = 1.0 - p.head(static_cast<Eigen::Index>(d) - 1).sum();
        if (p.minCoeff() < 0) continue;
        const double t = majorizer_scale(m, p);
        if (t < best) {
          best = t;
          best_p = p;
        }
      }
    half *= 0.5;
  }
  return std::max(0.0, best - 1.0);
}

double bisection_delta_robustness(const TheoryDescriptor& theory, const DensityOperator& rho, double delta,
                                  const DensityOperator& pi, double tol) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (theory.dim() != rho.dim() || theory.dim() != pi.dim())
    fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  RobustnessOptions opts;
  opts.closed_forms = theory.kind() != TheoryKind::Coherence;
  auto inside = [&](double s) {
    ComplexMatrix mix = (rho.matrix() + s * pi.matrix()) / (1.0 + s);
    mix = 0.5 * (mix + mix.adjoint()).eval();
    const DensityOperator state(std::move(mix), rho.dims(), 1e-7);
    return std::log2(1.0 + global_robustness(theory, state, opts).value) <= delta + 1e-12;
  };
  constexpr double kMax = 1e6;
  if (inside(0.0)) return 0.0;
  if (!inside(kMax)) return kInf;
  double lo = 0.0, hi = 1.0;
  while (!inside(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace rtd
