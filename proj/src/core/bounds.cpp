#include "bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "oracles.hpp"

namespace rtd {

ExtensiveConstant extensive_constant(TheoryKind kind, const WeightedPureState& phi) {
  if (std::abs(phi.weight() - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "target must be normalized");
  switch (kind) {
    case TheoryKind::Coherence:
      return {-std::log2(dephase(phi).maxCoeff()), "dephase"};
    case TheoryKind::Entanglement: {
      if (phi.dims().size() != 2) fail(ErrorCode::UnsupportedInput, "entanglement target needs dims [dA, dB]");
      const std::size_t keep[] = {1};
      return {s_min(partial_trace(phi, keep)), "partial_trace"};
    }
    case TheoryKind::Purity:
      return {std::log2(double(phi.dim())), "log2_dim"};
  }
  fail(ErrorCode::Internal, "unreachable");
}

namespace {

void validate(double delta, double eps) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (!(eps >= 0.0) || eps > 1.0) fail(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");
}

std::size_t largest_buildable_m(const WeightedPureState& phi) {
  std::size_t m = 1;
  double size = double(phi.dim());
  while (size * double(phi.dim()) <= 1024.0) {
    size *= double(phi.dim());
    ++m;
  }
  return m;
}

}  // namespace

UpperBound upper_bound(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                       double delta, double eps, const BoundOptions& opts) {
  validate(delta, eps);
  UpperBound ub;
  const auto ec = extensive_constant(theory.kind(), phi);
  if (!(ec.c > 0)) fail(ErrorCode::InvalidArgument, "target has c(phi) = 0; the bound is undefined");
  ub.c_phi = ec.c;

  const bool pure = is_pure(rho, 1e-10);
  SmoothingBallSpec spec = opts.smoothing;
  spec.ball = pure ? BallKind::Pure : BallKind::General;
  spec.epsilon = std::min(1.0, pure ? 2.0 * eps : 2.0 * std::sqrt(2.0 * eps));
  ub.ball = spec.ball;
  ub.smoothing_radius = spec.epsilon;

  const auto g = g_min_smoothed(theory, rho, spec);
  ub.g_min_smoothed = g.value;
  ub.exact = g.exact;
  if (!g.exact && opts.grid_for_small_mixed && theory.kind() != TheoryKind::Entanglement && rho.dim() <= 3 &&
      spec.epsilon > 0 && spec.epsilon < 1) {
    ub.g_min_smoothed =
        std::max(ub.g_min_smoothed, grid_smoothed_g_min(theory, rho, spec.epsilon, spec.ball, opts.grid_resolution));
  }
  if (!g.exact) ub.flags.push_back("smoothed G_min is a lower estimate; the upper bound may be understated");

  const double term = std::log2(1.0 + delta);
  ub.value = (ub.g_min_smoothed + term) / ec.c;
  ub.conservative = (ub.g_min_smoothed + std::max(delta, term)) / ec.c;
  if (delta > 1.0) ub.flags.push_back("delta > 1: log2(1 + delta) < delta; see upper_conservative");
  return ub;
}

LowerBound lower_bound(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                       double delta, double eps, std::size_t cap, const BoundOptions& opts) {
  validate(delta, eps);
  LowerBound lb;
  if (eps >= 0.5) {
    lb.flags.push_back("epsilon >= 1/2: the construction gives no fidelity guarantee");
    return lb;
  }
  cap = std::min(cap, largest_buildable_m(phi));
  SmoothingBallSpec spec = opts.smoothing;
  spec.ball = BallKind::Pure;
  spec.epsilon = effect_epsilon(eps);
  const auto effect = g_min_smoothed(theory, rho, spec);
  lb.exact = effect.exact;
  if (!effect.exact) lb.flags.push_back("effect found by heuristic search");
  if (!effect.pure_argmax) {
    lb.flags.push_back("pure smoothing ball is empty");
    return lb;
  }
  lb.lhs = -std::log2(max_overlap(theory, *effect.pure_argmax).value);

  const TheoryDescriptor single(theory.kind(), phi.dims());
  if (delta == 0) {
    const auto r0 = free_robustness(single, phi.density());
    if (std::isfinite(r0.value) && r0.value > 0)
      lb.remark_floor = static_cast<std::size_t>(std::floor(lb.lhs / std::log2(1.0 + 2.0 * r0.value) + 1e-12));
  }

  for (std::size_t m = cap; m >= 1; --m) {
    const auto req = target_requirement(theory.kind(), phi, m, delta);
    lb.rhs = req.value;
    lb.condition = req.condition;
    if (lb.lhs < req.value - 1e-12) continue;
    try {
      DistillationOptions dopts;
      dopts.smoothing = spec;
      auto map = build_distillation_map(theory, rho, effect, phi, m, delta, eps, dopts);
      lb.m = m;
      if (!req.exact) lb.exact = false;
      for (const auto& n : req.notes) lb.flags.push_back(n);
      if (!map.fidelity_guarantee) lb.flags.push_back("fidelity guarantee check failed");
      lb.map = std::move(map);
      return lb;
    } catch (const HypothesisNotMet&) {
      continue;
    }
  }
  const auto req1 = target_requirement(theory.kind(), phi, 1, delta);
  lb.rhs = req1.value;
  lb.condition = req1.condition;
  if (!std::isfinite(req1.value)) lb.flags.push_back("target free robustness is infinite; no rate qualifies");
  return lb;
}

PseudoSubadditive pseudo_subadditive_bound(const TheoryDescriptor& theory, const DensityOperator& rho,
                                           std::size_t m, double delta) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (m == 0) fail(ErrorCode::InvalidArgument, "m must be positive");
  const auto r = delta_free_robustness(theory, rho, delta);
  if (!std::isfinite(r.value)) fail(ErrorCode::InvalidArgument, "R^delta(rho) is infinite");
  PseudoSubadditive out;
  out.r_delta = r.value;
  const double base = 1.0 + 2.0 * r.value;
  out.bound1 = std::log2(1.0 + std::pow(base, double(m))) - 1.0;
  out.bound2 = double(m) * std::log2(base);

  // Closed forms for LR^{m delta}(rho^m) on the maximally resourceful families.
  if (theory.kind() != TheoryKind::Purity && is_pure(rho, 1e-10)) {
    const WeightedPureState psi(to_pure(rho).vector(), theory.dims());
    if (is_maximally_resourceful(theory.kind(), psi))
      out.direct = target_requirement(theory.kind(), psi, m, double(m) * delta).value;
  }
  if (out.direct) out.chain_holds = *out.direct <= out.bound1 + 1e-6;
  out.chain_holds = out.chain_holds && out.bound1 <= out.bound2 + 1e-6;
  return out;
}

BoundReport rate_interval(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                          double delta, double eps, const BoundOptions& opts) {
  BoundReport rep;
  rep.kind = theory.kind();
  rep.dims = theory.dims();
  rep.delta = delta;
  rep.epsilon = eps;
  const auto ub = upper_bound(theory, rho, phi, delta, eps, opts);
  rep.c_phi = ub.c_phi;
  rep.upper = ub.value;
  rep.upper_conservative = ub.conservative;
  rep.g_min_smoothed = ub.g_min_smoothed;
  rep.smoothing_kind = ub.ball;
  rep.smoothing_radius = ub.smoothing_radius;
  rep.heuristic_flags = ub.flags;

  std::size_t cap = 0;
  if (!std::isfinite(ub.value)) cap = std::numeric_limits<std::size_t>::max();
  else if (ub.value > 1e-9) cap = static_cast<std::size_t>(std::ceil(ub.value - 1e-9));
  const auto lb = lower_bound(theory, rho, phi, delta, eps, cap, opts);
  rep.lower = lb.m;
  rep.lower_lhs = lb.lhs;
  rep.lower_rhs = lb.rhs;
  rep.lower_condition = lb.condition;
  rep.remark_floor = lb.remark_floor;
  if (lb.map) rep.fidelity_sq = lb.map->fidelity_sq;
  for (const auto& f : lb.flags) rep.heuristic_flags.push_back(f);
  rep.exact = ub.exact && lb.exact;
  if (rep.exact && double(rep.lower) > rep.upper + 1e-9)
    rep.heuristic_flags.push_back("sandwich violated: lower exceeds upper on exact paths");
  return rep;
}

std::vector<SweepRow> sweep(const TheoryDescriptor& theory, const DensityOperator& rho, const WeightedPureState& phi,
                            const std::vector<double>& deltas, const std::vector<double>& epsilons,
                            const SweepOptions& opts) {
  if (deltas.empty() || epsilons.empty()) fail(ErrorCode::InvalidArgument, "sweep grid is empty");
  for (double d : deltas) validate(d, 0.0);
  for (double e : epsilons) validate(0.0, e);

  const std::size_t cells = deltas.size() * epsilons.size();
  std::vector<SweepRow> rows(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      try {
        const double delta = deltas[i / epsilons.size()], eps = epsilons[i % epsilons.size()];
        rows[i].report = rate_interval(theory, rho, phi, delta, eps, opts.bounds);
        if (opts.robustness_column) rows[i].r_delta = delta_free_robustness(theory, rho, delta).value;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cells);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace rtd
