#include <algorithm>
#include <cmath>
#include <numeric>

#include "measures.hpp"
#include "oracles.hpp"
#include "random.hpp"

namespace rtd {

const char* to_string(BallKind b) noexcept { return b == BallKind::Pure ? "pure" : "general"; }

const char* to_string(SearchKind s) noexcept {
  switch (s) {
    case SearchKind::Auto: return "auto";
    case SearchKind::ClosedForm: return "closed_form";
    case SearchKind::LocalSearch: return "local_search";
    case SearchKind::Grid: return "grid";
  }
  return "unknown";
}

namespace {

// Largest <a, x> over unit x >= 0 with every x_i <= sqrt(t), for a sorted
// descending and nonnegative. The optimum caps the leading entries and keeps
// the rest proportional to a; leftover mass goes to zero-amplitude entries.
struct WaterFill {
  RealVector x;
  double overlap = 0.0;
};

WaterFill water_fill(const RealVector& a, double t) {
  const auto n = a.size();
  const double cap = std::sqrt(t);
  WaterFill out;
  out.x = RealVector::Zero(n);
  for (Eigen::Index k = 0; k <= n; ++k) {
    const double rest = k < n ? a.tail(n - k).squaredNorm() : 0.0;
    const double mass = 1.0 - double(k) * t;
    if (mass < -1e-15) break;
    if (rest > 0) {
      const double lambda = std::sqrt(std::max(0.0, mass) / rest);
      if (lambda * a(k) > cap * (1.0 + 1e-12)) continue;
      out.x.head(k).setConstant(cap);
      out.x.tail(n - k) = lambda * a.tail(n - k);
    } else {
      out.x.head(k).setConstant(cap);
      const auto zeros = n - k;
      if (zeros > 0) out.x.tail(zeros).setConstant(std::sqrt(std::max(0.0, mass) / double(zeros)));
    }
    break;
  }
  out.overlap = a.dot(out.x);
  return out;
}

struct ReducedOptimum {
  double ratio;  // max_i x_i^2 / <a,x>^2, the quantity to minimize
  RealVector x;
  double overlap;
};

// min over the pure ball of the free overlap, after the weight has been set
// to (1-eps)^2 / <a,x>^2. Only t with <a,x> >= 1 - eps is feasible.
ReducedOptimum reduced_pure_ball(const RealVector& a, double eps) {
  const auto n = a.size();
  const double t_floor = 1.0 / double(n);
  const double need = 1.0 - eps;
  auto h = [&](double t) { return water_fill(a, t).overlap; };

  double t_lo = t_floor;
  if (h(t_lo) < need) {
    double lo = t_floor, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) >= need ? hi : lo) = mid;
    }
    t_lo = hi;
  }

  auto eval = [&](double t) {
    const auto wf = water_fill(a, t);
    const double top = wf.x.cwiseAbs2().maxCoeff();
    return ReducedOptimum{top / (wf.overlap * wf.overlap), wf.x, wf.overlap};
  };

  constexpr int kScan = 4000;
  ReducedOptimum best = eval(t_lo);
  double best_t = t_lo;
  const double span = 1.0 - t_lo;
  for (int i = 1; i <= kScan && span > 0; ++i) {
    const double t = t_lo + span * double(i) / kScan;
    const auto r = eval(t);
    if (r.overlap >= need && r.ratio < best.ratio) {
      best = r;
      best_t = t;
    }
  }
  // Golden-section refinement inside the neighbouring scan cells.
  double lo = std::max(t_lo, best_t - span / kScan), hi = std::min(1.0, best_t + span / kScan);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
    const double t1 = hi - g * (hi - lo), t2 = lo + g * (hi - lo);
    const auto r1 = eval(t1), r2 = eval(t2);
    if (r1.ratio <= r2.ratio) {
      hi = t2;
      if (r1.overlap >= need && r1.ratio < best.ratio) best = r1;
    } else {
      lo = t1;
      if (r2.overlap >= need && r2.ratio < best.ratio) best = r2;
    }
  }
  return best;
}

// Unitary whose leading columns are the orthonormal columns of m.
ComplexMatrix complete_basis(const ComplexMatrix& m, Eigen::Index d) {
  ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(m).householderQ() * ComplexMatrix::Identity(d, d);
  q.leftCols(m.cols()) = m;
  return q;
}

double free_overlap(const TheoryDescriptor& theory, const ComplexVector& v) {
  switch (theory.kind()) {
    case TheoryKind::Coherence: return v.cwiseAbs2().maxCoeff();
    case TheoryKind::Purity: return 1.0 / double(theory.dim());
    case TheoryKind::Entanglement: {
      const double c = schmidt(WeightedPureState(v, theory.dims())).coefficients(0);
      return c * c;
    }
  }
  return 1.0;
}

SmoothedGmin finish_pure(const DensityOperator& rho, ComplexVector v, double weight, double value, bool exact,
                         SearchKind used) {
  SmoothedGmin out;
  out.value = value;
  weight = std::clamp(weight, 1e-300, 1.0);
  out.pure_argmax = WeightedPureState(std::move(v), rho.dims(), weight);
  out.argmax_fidelity = fidelity(rho, *out.pure_argmax);
  out.exact = exact;
  out.search_used = used;
  return out;
}

SmoothedGmin empty_ball(SearchKind used) {
  SmoothedGmin out;
  out.value = 0.0;
  out.exact = true;
  out.search_used = used;
  out.notes.push_back("pure ball is empty; value set to 0 by convention");
  return out;
}

SmoothedGmin exact_pure_input(const TheoryDescriptor& theory, const DensityOperator& rho, double eps) {
  const WeightedPureState psi = to_pure(rho);
  const double need2 = (1.0 - eps) * (1.0 - eps);
  switch (theory.kind()) {
    case TheoryKind::Purity:
      return finish_pure(rho, psi.vector(), need2, std::log2(double(theory.dim())) - 2.0 * std::log2(1.0 - eps),
                         true, SearchKind::ClosedForm);
    case TheoryKind::Coherence: {
      const RealVector mag = psi.vector().cwiseAbs();
      std::vector<Eigen::Index> order(static_cast<std::size_t>(mag.size()));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return mag(i) > mag(j); });
      RealVector a(mag.size());
      for (std::size_t k = 0; k < order.size(); ++k) a(static_cast<Eigen::Index>(k)) = mag(order[k]);
      const auto opt = reduced_pure_ball(a, eps);
      ComplexVector v(mag.size());
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto i = order[k];
        const cplx phase = mag(i) > 0 ? psi.vector()(i) / mag(i) : cplx(1.0);
        v(i) = opt.x(static_cast<Eigen::Index>(k)) * phase;
      }
      return finish_pure(rho, v.normalized(), need2 / (opt.overlap * opt.overlap), -std::log2(need2 * opt.ratio),
                         true, SearchKind::ClosedForm);
    }
    case TheoryKind::Entanglement: {
      const WeightedPureState unit(psi.vector(), theory.dims());
      const Schmidt sd = schmidt(unit);
      const auto da = static_cast<Eigen::Index>(theory.dims()[0]);
      const auto db = static_cast<Eigen::Index>(theory.dims()[1]);
      const Eigen::Index n = std::min(da, db);
      RealVector a = RealVector::Zero(n);
      a.head(sd.coefficients.size()) = sd.coefficients;
      const auto opt = reduced_pure_ball(a, eps);
      const ComplexMatrix u = complete_basis(sd.left, da), w = complete_basis(sd.right, db);
      ComplexVector v = ComplexVector::Zero(da * db);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index p = 0; p < da; ++p) v.segment(p * db, db) += opt.x(i) * u(p, i) * w.col(i);
      return finish_pure(rho, v.normalized(), need2 / (opt.overlap * opt.overlap), -std::log2(need2 * opt.ratio),
                         true, SearchKind::ClosedForm);
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

// Maximize <v|rho|v> / ov(v) over unit v with <v|rho|v> >= (1-eps)^2 by a
// seeded random-direction search with geometric step decay.
SmoothedGmin local_search(const TheoryDescriptor& theory, const DensityOperator& rho, double eps,
                          const SmoothingBallSpec& spec) {
  const double need2 = (1.0 - eps) * (1.0 - eps);
  const auto eig = herm_eig(rho.matrix());
  if (eig.values(0) < need2) return empty_ball(SearchKind::LocalSearch);

  const auto d = static_cast<Eigen::Index>(rho.dim());
  const ComplexMatrix& m = rho.matrix();
  auto score = [&](const ComplexVector& v, double& q) {
    q = (v.adjoint() * m * v)(0, 0).real();
    return q >= need2 ? q / free_overlap(theory, v) : -1.0;
  };

  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector best_v = eig.vectors.col(0);
  double best_q = 0.0;
  double best = score(best_v, best_q);
  // Pure input: the state itself is a feasible starting point.
  for (std::size_t r = 0; r < std::max<std::size_t>(1, spec.restarts); ++r) {
    ComplexVector v = eig.vectors.col(0);
    if (r > 0) {
      ComplexVector kick(d);
      for (auto& z : kick) z = cplx(gauss(rng), gauss(rng));
      v = (v + (0.3 * double(r) / double(spec.restarts)) * kick.normalized()).normalized();
    }
    double q = 0.0;
    double cur = score(v, q);
    if (cur < 0) {
      v = eig.vectors.col(0);
      cur = score(v, q);
    }
    double step = spec.step;
    std::size_t misses = 0;
    for (std::size_t it = 0; it < spec.max_iter && step > 1e-9; ++it) {
      ComplexVector dir(d);
      for (auto& z : dir) z = cplx(gauss(rng), gauss(rng));
      const ComplexVector cand = (v + step * dir.normalized()).normalized();
      double cq = 0.0;
      const double cs = score(cand, cq);
      if (cs > cur) {
        v = cand;
        cur = cs;
        q = cq;
        misses = 0;
      } else if (++misses >= static_cast<std::size_t>(2 * d + 4)) {
        step *= spec.step_decay;
        misses = 0;
      }
    }
    if (cur > best) {
      best = cur;
      best_v = v;
      best_q = q;
    }
  }
  auto out = finish_pure(rho, best_v, need2 / best_q, -std::log2(need2 / best), false, SearchKind::LocalSearch);
  out.notes.push_back("heuristic search: value is a feasible lower estimate of the supremum");
  return out;
}

// General ball, coherence: w [(1-p) rho + p |v><v|] with w = (1-eps)^2 / F^2,
// searched over (v, p) from seeded restarts. Returns -inf if nothing feasible.
struct MixtureCandidate {
  double value = -kInf;
  ComplexMatrix x;
  double fid = 0.0;
};

MixtureCandidate mixture_search(const DensityOperator& rho, double eps, const SmoothingBallSpec& spec) {
  const double need2 = (1.0 - eps) * (1.0 - eps);
  const ComplexMatrix& m = rho.matrix();
  const auto d = static_cast<Eigen::Index>(rho.dim());
  auto evaluate = [&](const ComplexVector& v, double p, MixtureCandidate& c) {
    const ComplexMatrix x = (1.0 - p) * m + p * (v * v.adjoint());
    const double f = fidelity(x, m);
    if (f <= 0) return -kInf;
    const double w = need2 / (f * f);
    if (w > 1.0) return -kInf;
    const double value = -std::log2(w * x.diagonal().real().maxCoeff());
    c.x = w * x;
    c.fid = std::sqrt(w) * f;
    return value;
  };

  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_vector = [&] {
    ComplexVector v(d);
    for (auto& z : v) z = cplx(gauss(rng), gauss(rng));
    return ComplexVector(v.normalized());
  };
  // Best p for a fixed v by golden section (the objective is unimodal in
  // practice; the coarse scan guards the rest).
  auto line_search = [&](const ComplexVector& v, double& p, MixtureCandidate& c) {
    double best_p = p, best_v = evaluate(v, p, c);
    for (int k = 0; k <= 20; ++k) {
      MixtureCandidate tmp;
      const double q = double(k) / 20.0, val = evaluate(v, q, tmp);
      if (val > best_v) best_v = val, best_p = q;
    }
    double lo = std::max(0.0, best_p - 0.05), hi = std::min(1.0, best_p + 0.05);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 40; ++i) {
      MixtureCandidate t1, t2;
      const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      const double fa = evaluate(v, a, t1), fb = evaluate(v, b, t2);
      if (fa >= fb) hi = b;
      else lo = a;
      if (fa > best_v) best_v = fa, best_p = a;
      if (fb > best_v) best_v = fb, best_p = b;
    }
    p = best_p;
    return evaluate(v, p, c);
  };

  const auto eig = herm_eig(m);
  // Starts: the top eigenvector, every basis vector (mixing in a basis state
  // flattens the diagonal), then random vectors.
  std::vector<ComplexVector> starts{eig.vectors.col(0)};
  for (Eigen::Index i = 0; i < d; ++i) starts.push_back(ComplexVector::Unit(d, i));
  const std::size_t total = starts.size() + std::max<std::size_t>(1, spec.restarts);
  MixtureCandidate best;
  ComplexVector best_vec = starts[0];
  double best_p = 0.0;
  for (std::size_t r = 0; r < total; ++r) {
    ComplexVector v = r < starts.size() ? starts[r] : random_vector();
    double p = r < starts.size() ? 0.0 : unit(rng);
    MixtureCandidate cur;
    cur.value = line_search(v, p, cur);
    double step = spec.step;
    std::size_t misses = 0;
    for (std::size_t it = 0; it < spec.max_iter && step > 1e-9; ++it) {
      const ComplexVector cv = (v + step * random_vector()).normalized();
      const double cp = std::clamp(p + step * gauss(rng) * 0.5, 0.0, 1.0);
      MixtureCandidate cand;
      cand.value = evaluate(cv, cp, cand);
      if (cand.value > cur.value) {
        v = cv;
        p = cp;
        cur = std::move(cand);
        misses = 0;
      } else if (++misses >= static_cast<std::size_t>(2 * d + 4)) {
        step *= spec.step_decay;
        misses = 0;
      }
    }
    cur.value = line_search(v, p, cur);
    if (cur.value > best.value) {
      best = std::move(cur);
      best_vec = v;
      best_p = p;
    }
  }
  if (!std::isfinite(best.value)) return best;
  // Polish the incumbent, re-optimizing p after every move of v.
  double step = 0.1;
  std::size_t misses = 0;
  for (std::size_t it = 0; it < spec.max_iter / 2 && step > 1e-7; ++it) {
    const ComplexVector cv = (best_vec + step * random_vector()).normalized();
    double cp = best_p;
    MixtureCandidate cand;
    cand.value = line_search(cv, cp, cand);
    if (cand.value > best.value) {
      best = std::move(cand);
      best_vec = cv;
      best_p = cp;
      misses = 0;
    } else if (++misses >= static_cast<std::size_t>(2 * d + 4)) {
      step *= spec.step_decay;
      misses = 0;
    }
  }
  return best;
}

// General ball, coherence: X = D rho D with D >= 0 diagonal. Then
// F(X, rho) = Tr(D rho) and X_ii = d_i^2 rho_ii, so with y_i = d_i sqrt(rho_ii)
// the problem is the pure-ball reduction with amplitudes sqrt(diag(rho)).
MixtureCandidate diagonal_rescaling(const DensityOperator& rho, double eps) {
  const RealVector diag = rho.matrix().diagonal().real().cwiseMax(0.0);
  const auto n = diag.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return diag(i) > diag(j); });
  RealVector a(n);
  for (Eigen::Index k = 0; k < n; ++k) a(k) = std::sqrt(diag(order[static_cast<std::size_t>(k)]));
  MixtureCandidate out;
  if (a.squaredNorm() <= 0) return out;
  a /= a.norm();
  const auto opt = reduced_pure_ball(a, eps);
  if (!(opt.overlap >= 1.0 - eps - 1e-12)) return out;
  const double s = std::min(1.0, (1.0 - eps) / opt.overlap);
  RealVector d = RealVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    if (a(k) > 0) d(order[static_cast<std::size_t>(k)]) = s * opt.x(k) / a(k);
  const auto dd = d.cast<cplx>().asDiagonal();
  out.x = dd * rho.matrix() * dd;
  out.fid = fidelity(out.x, rho.matrix());
  const double top = out.x.diagonal().real().maxCoeff();
  if (top > 0 && out.fid >= 1.0 - eps - 1e-9) out.value = -std::log2(top);
  return out;
}

SmoothedGmin pure_ball(const TheoryDescriptor& theory, const DensityOperator& rho, const SmoothingBallSpec& spec) {
  const double eps = spec.epsilon;
  const bool pure = is_pure(rho, 1e-10);
  if (theory.kind() == TheoryKind::Purity) {
    // Free overlap is 1/d for every vector, so the top eigenvector is optimal.
    const double need2 = (1.0 - eps) * (1.0 - eps);
    const auto eig = herm_eig(rho.matrix());
    if (eig.values(0) < need2) return empty_ball(SearchKind::ClosedForm);
    return finish_pure(rho, eig.vectors.col(0), need2 / eig.values(0),
                       std::log2(double(theory.dim())) + std::log2(eig.values(0)) - 2.0 * std::log2(1.0 - eps), true,
                       SearchKind::ClosedForm);
  }
  switch (spec.search) {
    case SearchKind::Auto:
      return pure ? exact_pure_input(theory, rho, eps) : local_search(theory, rho, eps, spec);
    case SearchKind::ClosedForm:
      if (!pure) fail(ErrorCode::UnsupportedInput, "closed-form smoothing needs a pure input");
      return exact_pure_input(theory, rho, eps);
    case SearchKind::LocalSearch:
      return local_search(theory, rho, eps, spec);
    case SearchKind::Grid: {
      SmoothedGmin out;
      out.value = grid_smoothed_g_min(theory, rho, eps, BallKind::Pure, spec.grid_resolution);
      out.search_used = SearchKind::Grid;
      out.notes.push_back("grid value: feasible lower estimate at the given resolution");
      return out;
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

}  // namespace

SmoothedGmin g_min_smoothed(const TheoryDescriptor& theory, const DensityOperator& rho,
                            const SmoothingBallSpec& spec) {
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  const double eps = spec.epsilon;
  if (!(eps >= 0.0) || eps > 1.0) fail(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");

  if (eps >= 1.0) {
    SmoothedGmin out;
    out.value = kInf;
    out.exact = true;
    out.search_used = SearchKind::ClosedForm;
    out.notes.push_back("epsilon = 1 admits arbitrarily small weights");
    return out;
  }

  if (eps == 0.0) {
    if (spec.ball == BallKind::Pure && !is_pure(rho, 1e-10)) return empty_ball(SearchKind::ClosedForm);
    SmoothedGmin out;
    const auto ov = max_overlap(theory, rho);
    out.value = -std::log2(ov.value);
    out.exact = true;
    out.search_used = SearchKind::ClosedForm;
    if (spec.ball == BallKind::Pure) out.pure_argmax = to_pure(rho);
    else out.argmax = rho.matrix();
    out.argmax_fidelity = 1.0;
    return out;
  }

  if (spec.ball == BallKind::Pure) return pure_ball(theory, rho, spec);

  // General ball: the pure ball is a subset, and scaling rho itself by
  // (1-eps)^2 is feasible. Report the better of the two as a lower estimate.
  SmoothingBallSpec inner = spec;
  inner.ball = BallKind::Pure;
  SmoothedGmin out = pure_ball(theory, rho, inner);
  if (theory.kind() != TheoryKind::Entanglement || is_pure(rho, 1e-10)) {
    const double scale = (1.0 - eps) * (1.0 - eps);
    const double scaled = -std::log2(scale * max_overlap(theory, rho).value);
    if (scaled > out.value) {
      out.value = scaled;
      out.pure_argmax.reset();
      out.argmax = scale * rho.matrix();
      out.argmax_fidelity = 1.0 - eps;
      out.notes.clear();
    }
  }
  if (theory.kind() == TheoryKind::Coherence) {
    for (auto cand : {diagonal_rescaling(rho, eps), mixture_search(rho, eps, spec)}) {
      if (cand.value > out.value) {
        out.value = cand.value;
        out.pure_argmax.reset();
        out.argmax = std::move(cand.x);
        out.argmax_fidelity = cand.fid;
        out.notes.clear();
      }
    }
  }
  out.exact = false;
  out.notes.push_back("general ball: best of the pure-ball optimum, the scaled input, diagonal rescalings "
                      "D rho D and mixtures of rho with a pure state (lower estimate)");
  return out;
}

}  // namespace rtd
