#include "measures.hpp"

#include <algorithm>
#include <cmath>

#include "lp.hpp"
#include "random.hpp"

namespace rtd {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::ClosedForm: return "closed_form";
    case Method::SymmetricReduction: return "symmetric_reduction";
    case Method::CuttingPlane: return "cutting_plane";
    case Method::Bisection: return "bisection";
    case Method::GridOracle: return "grid_oracle";
  }
  return "unknown";
}

namespace {

// Certificates are assembled from floating-point arithmetic; accept them at a
// looser tolerance and renormalize the trace.
DensityOperator certificate_state(ComplexMatrix m, const Dims& dims) {
  m = 0.5 * (m + m.adjoint()).eval();
  m /= m.trace().real();
  return DensityOperator(std::move(m), dims, 1e-7);
}

ComplexMatrix identity(std::size_t d) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

bool small_bipartite(const Dims& dims) { return dims.size() == 2 && dims[0] * dims[1] <= 6; }

RobustnessResult already_free(const DensityOperator& rho, const TheoryDescriptor& theory,
                              const MembershipVerdict& v) {
  RobustnessResult r;
  r.value = 0.0;
  r.free_point = rho;
  r.method = Method::ClosedForm;
  if (v.relaxation && !small_bipartite(theory.dims())) {
    // PPT is exact only up to 2 x 3.
    r.exact = false;
    r.gap = kInf;
    r.notes.push_back("membership decided by the PPT surrogate; value is a lower bound");
  }
  return r;
}

bool permutation_symmetric(const ComplexMatrix& m, double tol) {
  const auto d = m.rows();
  if (d < 2) return true;
  const cplx diag = m(0, 0), off = m(0, 1);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const cplx ref = i == j ? diag : off;
      if (std::abs(m(i, j) - ref) > tol) return false;
    }
  return true;
}

RobustnessResult coherence_pure(const DensityOperator& rho) {
  const auto psi = to_pure(rho);
  const RealVector c = psi.vector().cwiseAbs();
  const double n = c.sum();
  RobustnessResult r;
  r.value = std::max(0.0, n * n - 1.0);
  r.method = Method::ClosedForm;
  r.free_point = certificate_state(c.cast<cplx>().asDiagonal(), rho.dims());
  if (r.value > 0) {
    ComplexMatrix m = n * ComplexMatrix(c.cast<cplx>().asDiagonal()) - psi.vector() * psi.vector().adjoint();
    r.mixing_state = certificate_state(std::move(m), rho.dims());
  }
  return r;
}

RobustnessResult coherence_qubit(const DensityOperator& rho) {
  const auto& m = rho.matrix();
  const double c = std::abs(m(0, 1));
  RobustnessResult r;
  r.value = 2.0 * c;
  r.method = Method::ClosedForm;
  ComplexMatrix maj = ComplexMatrix::Zero(2, 2);
  maj(0, 0) = m(0, 0).real() + c;
  maj(1, 1) = m(1, 1).real() + c;
  r.free_point = certificate_state(maj, rho.dims());
  if (c > 0) r.mixing_state = certificate_state(maj - m, rho.dims());
  return r;
}

RobustnessResult coherence_symmetric(const DensityOperator& rho) {
  const double mu = lambda_max(rho.matrix());
  const auto d = rho.dim();
  RobustnessResult r;
  r.value = std::max(0.0, double(d) * mu - 1.0);
  r.method = Method::SymmetricReduction;
  r.free_point = DensityOperator::maximally_mixed(rho.dims());
  if (r.value > 0) r.mixing_state = certificate_state(mu * identity(d) - rho.matrix(), rho.dims());
  return r;
}

RobustnessResult entanglement_pure(const DensityOperator& rho, const TheoryDescriptor& theory) {
  const WeightedPureState psi(to_pure(rho).vector(), theory.dims());
  const Schmidt sd = schmidt(psi);
  const double n = sd.coefficients.sum();
  RobustnessResult r;
  r.value = std::max(0.0, n * n - 1.0);
  r.method = Method::ClosedForm;
  if (r.value <= 0) {
    r.free_point = rho;
    return r;
  }
  // Phase-averaged product states: N^2 gamma = psi + sum_{i != j} s_i s_j |u_i w_j><u_i w_j|.
  const auto da = sd.left.rows(), db = sd.right.rows();
  ComplexMatrix off = ComplexMatrix::Zero(da * db, da * db);
  for (Eigen::Index i = 0; i < sd.coefficients.size(); ++i)
    for (Eigen::Index j = 0; j < sd.coefficients.size(); ++j) {
      if (i == j) continue;
      ComplexVector v(da * db);
      for (Eigen::Index a = 0; a < da; ++a) v.segment(a * db, db) = sd.left(a, i) * sd.right.col(j);
      off += sd.coefficients(i) * sd.coefficients(j) * v * v.adjoint();
    }
  r.mixing_state = certificate_state(off, theory.dims());
  r.free_point = certificate_state(psi.vector() * psi.vector().adjoint() + off, theory.dims());
  return r;
}

ComplexMatrix phi_projector(std::size_t d) {
  const auto v = maximally_entangled(d).vector();
  return v * v.adjoint();
}

RobustnessResult entanglement_isotropic(const DensityOperator& rho, std::size_t d, double f) {
  RobustnessResult r;
  r.value = std::max(0.0, double(d) * f - 1.0);
  r.method = Method::SymmetricReduction;
  const double dd = double(d * d);
  const ComplexMatrix phi = phi_projector(d);
  const ComplexMatrix comp = (identity(d * d) - phi) / (dd - 1.0);
  if (r.value <= 0) {
    r.free_point = rho;
    return r;
  }
  const double fd = 1.0 / double(d);
  r.free_point = certificate_state(fd * phi + (1.0 - fd) * comp, rho.dims());
  r.mixing_state = certificate_state(comp, rho.dims());
  return r;
}

}  // namespace

double s_min(const DensityOperator& rho) { return -std::log2(lambda_max(rho.matrix())); }

double g_min(const TheoryDescriptor& theory, const DensityOperator& rho) {
  return -std::log2(max_overlap(theory, rho).value);
}

double g_min(const TheoryDescriptor& theory, const WeightedPureState& psi) {
  return -std::log2(max_overlap(theory, psi).value);
}

std::optional<double> isotropic_fidelity(const DensityOperator& rho, double tol) {
  const auto& dims = rho.dims();
  if (dims.size() != 2 || dims[0] != dims[1] || dims[0] < 2) return std::nullopt;
  const std::size_t d = dims[0];
  const ComplexMatrix phi = phi_projector(d);
  const double f = (phi * rho.matrix()).trace().real();
  const ComplexMatrix iso = f * phi + (1.0 - f) * (identity(d * d) - phi) / (double(d * d) - 1.0);
  if ((rho.matrix() - iso).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return f;
}

RobustnessResult coherence_global_robustness_cutting_plane(const DensityOperator& rho, double cut_tol,
                                                           std::size_t max_cuts) {
  const auto d = static_cast<Eigen::Index>(rho.dim());
  const ComplexMatrix& m = rho.matrix();
  // Cuts as rows: coeffs . x >= rhs. Start from the diagonal bounds x_i >= rho_ii.
  std::vector<RealVector> cut_coeffs;
  std::vector<double> cut_rhs;
  for (Eigen::Index i = 0; i < d; ++i) {
    RealVector e = RealVector::Zero(d);
    e(i) = 1.0;
    cut_coeffs.push_back(e);
    cut_rhs.push_back(std::max(0.0, m(i, i).real()));
  }

  RealVector x = RealVector::Zero(d);
  double low = 0.0;
  std::size_t iter = 0;
  bool lp_stalled = false;
  std::vector<std::size_t> cut_idle(cut_coeffs.size(), 0);
  // Stable ids let the previous LP basis seed the next solve.
  std::vector<std::size_t> cut_id(cut_coeffs.size());
  for (std::size_t i = 0; i < cut_id.size(); ++i) cut_id[i] = i;
  std::size_t next_id = cut_id.size();
  std::vector<long> basis_ids;  // cut id, or -(row + 1) for a slack
  constexpr std::size_t kIdleLimit = 50;
  EigenSystem eig;
  for (;; ++iter) {
    // Dual LP: maximize rhs.y subject to coeffs^T y <= 1, y >= 0. Its shadow
    // prices are the primal x.
    const auto k = static_cast<Eigen::Index>(cut_coeffs.size());
    Eigen::MatrixXd a(d, k);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(d), c(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      a.col(j) = cut_coeffs[static_cast<std::size_t>(j)];
      c(j) = cut_rhs[static_cast<std::size_t>(j)];
    }
    std::vector<Eigen::Index> warm;
    for (long id : basis_ids) {
      if (id < 0) {
        warm.push_back(k + (-id - 1));
        continue;
      }
      const auto it = std::find(cut_id.begin(), cut_id.end(), static_cast<std::size_t>(id));
      if (it == cut_id.end()) {
        warm.clear();
        break;
      }
      warm.push_back(it - cut_id.begin());
    }
    lp::Solution sol;
    try {
      sol = lp::maximize(a, b, c, warm);
    } catch (const Error&) {
      // Nearly parallel cuts can stall the simplex; the last iterate with
      // its eigenvalue shift is still a valid certificate.
      if (iter == 0) throw;
      lp_stalled = true;
      break;
    }
    x = sol.duals;
    low = sol.objective;
    basis_ids.clear();
    for (Eigen::Index j : sol.basis)
      basis_ids.push_back(j < k ? static_cast<long>(cut_id[static_cast<std::size_t>(j)]) : -static_cast<long>(j - k + 1));
    // Cuts that carry no weight in the LP optimum for many consecutive
    // rounds are dropped; this keeps the tableau small and well conditioned
    // without letting Kelley's method cycle on degenerate inputs.
    std::vector<RealVector> kept_coeffs;
    std::vector<double> kept_rhs;
    std::vector<std::size_t> kept_idle, kept_id;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto u = static_cast<std::size_t>(j);
      cut_idle[u] = sol.x(j) > 0 ? 0 : cut_idle[u] + 1;
      if (j < d || cut_idle[u] < kIdleLimit) {
        kept_coeffs.push_back(std::move(cut_coeffs[u]));
        kept_rhs.push_back(cut_rhs[u]);
        kept_idle.push_back(cut_idle[u]);
        kept_id.push_back(cut_id[u]);
      }
    }
    cut_coeffs = std::move(kept_coeffs);
    cut_rhs = std::move(kept_rhs);
    cut_idle = std::move(kept_idle);
    cut_id = std::move(kept_id);

    ComplexMatrix slack = -m;
    for (Eigen::Index i = 0; i < d; ++i) slack(i, i) += x(i);
    eig = herm_eig(slack, 1e-9);
    const double lmin = eig.values(d - 1);
    if (lmin >= -cut_tol || iter >= max_cuts) break;
    for (Eigen::Index j = d - 1; j >= 0 && eig.values(j) < -cut_tol; --j) {
      const ComplexVector v = eig.vectors.col(j);
      cut_coeffs.push_back(v.cwiseAbs2());
      cut_rhs.push_back((v.adjoint() * m * v)(0, 0).real());
      cut_idle.push_back(0);
      cut_id.push_back(next_id++);
    }
  }

  const double lmin = eig.values(d - 1);
  const double shift = std::max(0.0, -lmin);
  RealVector maj = x.array() + shift;
  const double trace = maj.sum();
  RobustnessResult r;
  r.value = std::max(0.0, trace - 1.0);
  r.method = Method::CuttingPlane;
  r.iterations = iter;
  r.gap = std::max(0.0, trace - low);
  if (lp_stalled) r.notes.push_back("linear program stalled; stopped at the last certified iterate");
  else if (lmin < -cut_tol) r.notes.push_back("cut limit reached before the eigenvalue threshold");
  ComplexMatrix maj_m = maj.cast<cplx>().asDiagonal();
  r.free_point = certificate_state(maj_m, rho.dims());
  if (r.value > 1e-12) r.mixing_state = certificate_state(maj_m - m, rho.dims());
  return r;
}

RobustnessResult global_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                                   const RobustnessOptions& opts) {
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  const auto verdict = is_free(theory, rho, rho.tol());
  if (verdict.member) return already_free(rho, theory, verdict);

  switch (theory.kind()) {
    case TheoryKind::Coherence:
      if (opts.closed_forms) {
        if (is_pure(rho, 1e-10)) return coherence_pure(rho);
        if (rho.dim() == 2) return coherence_qubit(rho);
        if (permutation_symmetric(rho.matrix(), 1e-12)) return coherence_symmetric(rho);
      }
      return coherence_global_robustness_cutting_plane(rho, opts.cut_tol, opts.max_cuts);
    case TheoryKind::Purity: {
      const double mu = lambda_max(rho.matrix());
      RobustnessResult r;
      r.value = std::max(0.0, double(rho.dim()) * mu - 1.0);
      r.method = Method::ClosedForm;
      r.free_point = DensityOperator::maximally_mixed(rho.dims());
      if (r.value > 0) r.mixing_state = certificate_state(mu * identity(rho.dim()) - rho.matrix(), rho.dims());
      return r;
    }
    case TheoryKind::Entanglement: {
      const DensityOperator local(rho.matrix(), theory.dims(), rho.tol());
      if (is_pure(local, 1e-10)) return entanglement_pure(local, theory);
      if (auto f = isotropic_fidelity(local)) return entanglement_isotropic(local, theory.dims()[0], *f);
      fail(ErrorCode::UnsupportedInput,
           "entanglement global robustness is available for pure and isotropic states only");
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

double global_log_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                             const RobustnessOptions& opts) {
  return std::log2(1.0 + global_robustness(theory, rho, opts).value);
}

bool is_delta_free(const TheoryDescriptor& theory, const DensityOperator& rho, double delta, double tol) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  return global_log_robustness(theory, rho) <= delta + tol;
}

RobustnessResult free_robustness(const TheoryDescriptor& theory, const DensityOperator& rho,
                                 const RobustnessOptions& opts) {
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  const auto verdict = is_free(theory, rho, rho.tol());
  if (verdict.member) return already_free(rho, theory, verdict);

  RobustnessResult r;
  switch (theory.kind()) {
    case TheoryKind::Coherence:
      r.value = kInf;
      r.notes.push_back("mixing an off-diagonal state with a diagonal one never removes coherence");
      return r;
    case TheoryKind::Purity:
      r.value = kInf;
      r.notes.push_back("the free set {I/d} is affine; only I/d itself has finite free robustness");
      return r;
    case TheoryKind::Entanglement: {
      // For pure and isotropic states the global-robustness certificates
      // already mix with a separable state, so both robustness values agree.
      // The symmetric families keep the isotropic complement as the witness.
      const DensityOperator local(rho.matrix(), theory.dims(), rho.tol());
      bool symmetric = isotropic_fidelity(local).has_value();
      if (!symmetric && theory.dims()[0] == theory.dims()[1] && is_pure(local, 1e-10)) {
        const RealVector c = schmidt(WeightedPureState(to_pure(local).vector(), theory.dims())).coefficients;
        const double flat = 1.0 / std::sqrt(double(theory.dims()[0]));
        symmetric = static_cast<std::size_t>(c.size()) == theory.dims()[0] &&
                    (c.array() - flat).abs().maxCoeff() < 1e-10;
      }
      if (symmetric) return delta_free_robustness(theory, rho, 0.0, opts);
      auto g = global_robustness(theory, rho, opts);
      g.notes.push_back("mixing state is separable, so the free and global robustness coincide");
      return g;
    }
  }
  (void)opts;
  fail(ErrorCode::Internal, "unreachable");
}

double delta_robustness_maximally_coherent(std::size_t d, double delta) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (d <= 1) return 0.0;
  if (delta == 0) return kInf;
  return std::max(0.0, double(d - 1) / (std::exp2(delta) - 1.0) - 1.0);
}

double delta_robustness_isotropic(std::size_t d, double f, double delta) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  return std::max(0.0, double(d) * f / std::exp2(delta) - 1.0);
}

namespace {

bool maximally_coherent_pure(const DensityOperator& rho) {
  if (!is_pure(rho, 1e-10)) return false;
  const auto psi = to_pure(rho);
  const double target = 1.0 / double(rho.dim());
  for (Eigen::Index i = 0; i < psi.vector().size(); ++i)
    if (std::abs(std::norm(psi.vector()(i)) - target) > 1e-10) return false;
  return true;
}

DensityOperator mix(const DensityOperator& rho, const DensityOperator& pi, double s) {
  return certificate_state((rho.matrix() + s * pi.matrix()) / (1.0 + s), rho.dims());
}

RobustnessResult mixing_result(const DensityOperator& rho, const DensityOperator& pi, double s, Method method,
                               bool exact) {
  RobustnessResult r;
  r.value = s;
  r.method = method;
  r.exact = exact;
  r.gap = exact ? 0.0 : kInf;
  if (std::isfinite(s)) {
    r.mixing_state = pi;
    r.free_point = mix(rho, pi, s);
  }
  return r;
}

// Smallest s on the ray (rho + s pi)/(1 + s) whose global log-robustness is
// at most delta. pi must be free so membership is monotone along the ray.
double ray_bisection(const TheoryDescriptor& theory, const DensityOperator& rho, const DensityOperator& pi,
                     double delta, double hi, double tol, const RobustnessOptions& opts, std::size_t& evals) {
  auto inside = [&](double s) {
    ++evals;
    return global_log_robustness(theory, mix(rho, pi, s), opts) <= delta + 1e-12;
  };
  if (inside(0.0)) return 0.0;
  while (!inside(hi)) {
    hi = 2.0 * hi + 1.0;
    if (hi > 1e12) return kInf;
  }
  double lo = 0.0;
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

RobustnessResult delta_free_robustness(const TheoryDescriptor& theory, const DensityOperator& rho, double delta,
                                       const RobustnessOptions& opts) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  if (delta == 0 && theory.kind() != TheoryKind::Entanglement) return free_robustness(theory, rho, opts);

  const auto g = global_robustness(theory, rho, opts);
  if (std::log2(1.0 + g.value) <= delta + 1e-12) {
    RobustnessResult r;
    r.value = 0.0;
    r.free_point = rho;
    r.method = g.method;
    return r;
  }

  switch (theory.kind()) {
    case TheoryKind::Coherence: {
      const auto mixed = DensityOperator::maximally_mixed(rho.dims());
      if (maximally_coherent_pure(rho)) {
        // Twirling over basis permutations fixes rho and sends every
        // incoherent mixing state to I/d, so I/d is optimal.
        return mixing_result(rho, mixed, delta_robustness_maximally_coherent(rho.dim(), delta),
                             Method::SymmetricReduction, true);
      }
      std::vector<DensityOperator> candidates{mixed};
      const auto deph = dephase(rho);
      if ((deph.matrix() - mixed.matrix()).norm() > 1e-9) candidates.push_back(deph);
      for (std::size_t k = 0; k < opts.random_candidates; ++k)
        candidates.push_back(random_free_state(theory, opts.seed + 1000003ULL * (k + 1)));

      // For free pi, R_g((rho + s pi)/(1+s)) <= R_g(rho)/(1+s) bounds the search.
      const double hi = std::max(0.0, g.value / (std::exp2(delta) - 1.0) - 1.0) * (1.0 + 1e-9) + 1e-12;
      double best = kInf;
      std::size_t best_idx = 0, evals = 0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& pi = candidates[i];
        if (std::isfinite(best) &&
            global_log_robustness(theory, mix(rho, pi, best * (1.0 - 1e-9)), opts) > delta + 1e-12)
          continue;  // membership is monotone along the ray, so this candidate cannot win
        const double s = ray_bisection(theory, rho, pi, delta, std::isfinite(best) ? best : hi,
                                       opts.bisection_tol, opts, evals);
        if (s < best) {
          best = s;
          best_idx = i;
        }
      }
      auto r = mixing_result(rho, candidates[best_idx], best, Method::Bisection, false);
      r.iterations = evals;
      r.notes.push_back("upper bound: best of " + std::to_string(candidates.size()) + " free mixing candidates");
      return r;
    }
    case TheoryKind::Purity: {
      // Mixing with I/d scales d*lambda_max - 1 by 1/(1+s).
      const double s = std::max(0.0, g.value / (std::exp2(delta) - 1.0) - 1.0);
      auto r = mixing_result(rho, DensityOperator::maximally_mixed(rho.dims()), s, Method::ClosedForm, false);
      r.notes.push_back("upper bound: mixing state fixed to I/d");
      return r;
    }
    case TheoryKind::Entanglement: {
      const DensityOperator local(rho.matrix(), theory.dims(), rho.tol());
      const std::size_t d = theory.dims()[0];
      const double dd = double(d * d);
      if (auto f = isotropic_fidelity(local)) {
        const ComplexMatrix comp = (identity(d * d) - phi_projector(d)) / (dd - 1.0);
        return mixing_result(local, certificate_state(comp, theory.dims()), delta_robustness_isotropic(d, *f, delta),
                             Method::SymmetricReduction, true);
      }
      if (theory.dims()[0] == theory.dims()[1] && is_pure(local, 1e-10)) {
        const WeightedPureState psi(to_pure(local).vector(), theory.dims());
        const Schmidt sd = schmidt(psi);
        const bool flat = static_cast<std::size_t>(sd.coefficients.size()) == d &&
                          (sd.coefficients.array() - 1.0 / std::sqrt(double(d))).abs().maxCoeff() < 1e-10;
        if (flat) {
          // Locally unitarily equivalent to the standard maximally entangled state.
          const ComplexMatrix comp = (identity(d * d) - psi.vector() * psi.vector().adjoint()) / (dd - 1.0);
          return mixing_result(local, certificate_state(comp, theory.dims()),
                               delta_robustness_isotropic(d, 1.0, delta), Method::SymmetricReduction, true);
        }
      }
      if (delta == 0) return free_robustness(theory, rho, opts);
      fail(ErrorCode::UnsupportedInput,
           "entanglement delta-free robustness is available for isotropic and maximally entangled states only");
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

double delta_free_log_robustness(const TheoryDescriptor& theory, const DensityOperator& rho, double delta,
                                 const RobustnessOptions& opts) {
  return std::log2(1.0 + delta_free_robustness(theory, rho, delta, opts).value);
}

}  // namespace rtd
