#include "channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "random.hpp"

namespace rtd {

namespace {

constexpr std::size_t kMaxOutputDim = 1024;

ComplexMatrix identity(std::size_t d) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

DensityOperator loose_state(ComplexMatrix m, const Dims& dims) {
  m = 0.5 * (m + m.adjoint()).eval();
  m /= m.trace().real();
  return DensityOperator(std::move(m), dims, 1e-7);
}

void require_dims(const Channel& ch, const DensityOperator& rho) {
  if (rho.dim() != product(ch.in_dims()))
    fail(ErrorCode::DimensionMismatch, "channel input dimension does not match the state");
}

}  // namespace

Channel Channel::kraus(std::vector<ComplexMatrix> ops, Dims in_dims, Dims out_dims) {
  const auto din = static_cast<Eigen::Index>(product(in_dims)), dout = static_cast<Eigen::Index>(product(out_dims));
  if (ops.empty()) fail(ErrorCode::InvalidArgument, "Kraus channel needs at least one operator");
  ComplexMatrix sum = ComplexMatrix::Zero(din, din);
  for (const auto& k : ops) {
    if (k.rows() != dout || k.cols() != din) fail(ErrorCode::DimensionMismatch, "Kraus operator has the wrong shape");
    require_finite(k, "Kraus operator");
    sum += k.adjoint() * k;
  }
  if ((sum - ComplexMatrix::Identity(din, din)).cwiseAbs().maxCoeff() > 1e-9)
    fail(ErrorCode::InvalidArgument, "Kraus operators are not trace preserving");
  return Channel(KrausMap{std::move(ops)}, std::move(in_dims), std::move(out_dims));
}

Channel Channel::measure_prepare(ComplexMatrix effect, WeightedPureState success, DensityOperator failure,
                                 Dims in_dims) {
  if (effect.rows() != static_cast<Eigen::Index>(product(in_dims)) || effect.cols() != effect.rows())
    fail(ErrorCode::DimensionMismatch, "effect does not act on the input space");
  if (success.dim() != failure.dim()) fail(ErrorCode::DimensionMismatch, "outputs live on different spaces");
  if (!is_hermitian(effect, 1e-9)) fail(ErrorCode::NotHermitian, "effect is not Hermitian");
  const auto eig = herm_eig(effect);
  if (eig.values(eig.values.size() - 1) < -1e-9 || eig.values(0) > 1.0 + 1e-9)
    fail(ErrorCode::NotPSD, "effect must satisfy 0 <= E <= I");
  Dims out = success.dims();
  return Channel(MeasurePrepare{std::move(effect), std::move(success), std::move(failure)}, std::move(in_dims),
                 std::move(out));
}

Channel Channel::dephasing(Dims dims) { return Channel(Dephasing{}, dims, dims); }
Channel Channel::twirl(Dims dims) { return Channel(Twirl{}, dims, dims); }

const char* Channel::kind_name() const {
  switch (variant_.index()) {
    case 0: return "kraus";
    case 1: return "measure_prepare";
    case 2: return "dephase";
    case 3: return "twirl";
  }
  return "unknown";
}

DensityOperator twirl(const DensityOperator& rho) {
  const auto d = static_cast<Eigen::Index>(rho.dim());
  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  if (d <= 8) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    double count = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) += m(i, j);
      count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out /= count;
  } else {
    const cplx diag = m.trace() / double(d);
    const cplx off = (m.sum() - m.trace()) / double(d * (d - 1));
    out.setConstant(off);
    out.diagonal().setConstant(diag);
  }
  return loose_state(std::move(out), rho.dims());
}

DensityOperator apply(const Channel& channel, const DensityOperator& rho) {
  require_dims(channel, rho);
  return std::visit(
      [&](const auto& v) -> DensityOperator {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, KrausMap>) {
          const auto dout = static_cast<Eigen::Index>(product(channel.out_dims()));
          ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
          for (const auto& k : v.ops) out += k * rho.matrix() * k.adjoint();
          return loose_state(std::move(out), channel.out_dims());
        } else if constexpr (std::is_same_v<T, MeasurePrepare>) {
          const double w = std::clamp((v.effect * rho.matrix()).trace().real(), 0.0, 1.0);
          const auto& s = v.success.vector();
          ComplexMatrix out = (1.0 - w) * v.failure.matrix() + w * (s * s.adjoint());
          return loose_state(std::move(out), channel.out_dims());
        } else if constexpr (std::is_same_v<T, Dephasing>) {
          return dephase(rho);
        } else {
          return twirl(rho);
        }
      },
      channel.variant());
}

namespace {

// Global log-robustness of a channel output, with the measure-and-prepare
// shortcut for entanglement: (1 - w) (I - phi)/(D - 1) + w phi is isotropic in
// the basis of phi, so LR_g = log2 max(1, d w).
double output_lr(TheoryKind kind, const Channel& ch, const DensityOperator& in, const DensityOperator& out,
                 std::optional<double>& overlap, bool& exact) {
  const auto* mp = std::get_if<MeasurePrepare>(&ch.variant());
  if (mp) {
    const auto& s = mp->success.vector();
    overlap = (s.adjoint() * out.matrix() * s)(0, 0).real();
  }
  const TheoryDescriptor theory(kind, out.dims());
  if (mp && kind == TheoryKind::Entanglement) {
    const auto& dims = out.dims();
    const DensityOperator comp = canonical_mixing_state(kind, mp->success);
    const WeightedPureState unit(mp->success.vector(), dims);
    const Schmidt sd = schmidt(unit);
    const double flat = 1.0 / std::sqrt(double(dims[0]));
    const bool max_ent = dims[0] == dims[1] && static_cast<std::size_t>(sd.coefficients.size()) == dims[0] &&
                         (sd.coefficients.array() - flat).abs().maxCoeff() < 1e-10 &&
                         (comp.matrix() - mp->failure.matrix()).cwiseAbs().maxCoeff() < 1e-12;
    if (max_ent) {
      const double w = std::clamp((mp->effect * in.matrix()).trace().real(), 0.0, 1.0);
      return std::log2(std::max(1.0, double(dims[0]) * w));
    }
  }
  const auto r = global_robustness(theory, out);
  if (!r.exact) exact = false;
  return std::log2(1.0 + r.value);
}

// Inputs on the boundary of F^delta: a random state mixed toward a free
// state until LR_g equals delta.
std::vector<DensityOperator> delta_free_inputs(TheoryKind kind, const Dims& dims, double delta, std::size_t n,
                                               std::uint64_t seed) {
  std::vector<DensityOperator> out;
  const TheoryDescriptor theory(kind, dims);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t k = 0; k < n; ++k) {
    if (kind == TheoryKind::Entanglement) {
      // Isotropic states rotated by random local unitaries keep LR_g = log2(d F).
      if (dims[0] != dims[1]) fail(ErrorCode::UnsupportedInput, "delta-free samples need dA = dB");
      const std::size_t d = dims[0];
      const double f = std::min(1.0, std::exp2(delta) / double(d));
      const auto phi = maximally_entangled(d).vector();
      const ComplexMatrix proj = phi * phi.adjoint();
      const ComplexMatrix iso = f * proj + (1.0 - f) * (identity(d * d) - proj) / (double(d * d) - 1.0);
      const ComplexMatrix u = random_unitary(d, rng), v = random_unitary(d, rng);
      ComplexMatrix uv(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          uv.block(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(j * d), static_cast<Eigen::Index>(d),
                   static_cast<Eigen::Index>(d)) = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v;
      out.push_back(loose_state(uv * iso * uv.adjoint(), dims));
      continue;
    }
    const DensityOperator sigma = random_mixed_state(dims, rng);
    const DensityOperator gamma = random_free_state(theory, seed + 7919 * (k + 1));
    auto mix = [&](double q) { return loose_state((1.0 - q) * gamma.matrix() + q * sigma.matrix(), dims); };
    auto lr = [&](double q) { return global_log_robustness(theory, mix(q)); };
    double lo = 0.0, hi = 1.0;
    if (lr(1.0) <= delta) {
      out.push_back(sigma);
      continue;
    }
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (lr(mid) <= delta ? lo : hi) = mid;
    }
    out.push_back(mix(lo));
  }
  return out;
}

}  // namespace

DeltaRGCertificate certify_delta_rg(const Channel& channel, TheoryKind kind, double delta,
                                    const CertifyOptions& opts) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  const TheoryDescriptor in_theory(kind, channel.in_dims());
  DeltaRGCertificate cert;
  cert.delta = delta;
  bool exact = true;

  auto check = [&](const DensityOperator& gamma, std::size_t index, bool delta_input) {
    const DensityOperator out = apply(channel, gamma);
    CheckedPoint p;
    p.index = index;
    p.delta_free_input = delta_input;
    p.output_lr = output_lr(kind, channel, gamma, out, p.target_overlap, exact);
    cert.max_output_lr = std::max(cert.max_output_lr, p.output_lr);
    cert.checked_points.push_back(p);
  };

  const auto extreme = extreme_free_states(in_theory, opts.sample_size, opts.seed);
  for (std::size_t i = 0; i < extreme.size(); ++i) check(extreme[i], i, false);
  const bool enumerable = in_theory.capabilities().extreme_points_enumerable;
  if (!enumerable) cert.notes.push_back("product inputs are a seeded sample of a continuum");

  if (delta > 0 && opts.delta_free_samples > 0) {
    const auto extra = delta_free_inputs(kind, channel.in_dims(), delta, opts.delta_free_samples, opts.seed);
    for (std::size_t i = 0; i < extra.size(); ++i) check(extra[i], extreme.size() + i, true);
    cert.notes.push_back("includes sampled inputs from the boundary of F^delta");
  }

  if (!exact) cert.notes.push_back("some output log-robustness values are bounds rather than exact");
  cert.exhaustive = enumerable && exact && !(delta > 0 && opts.delta_free_samples > 0);
  cert.verdict = cert.max_output_lr <= delta + opts.tol;
  return cert;
}

ExtensivityCheck verify_extensivity(TheoryKind kind, const WeightedPureState& phi, std::size_t m, double c,
                                    std::size_t trials, std::uint64_t seed, double tol) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "m must be positive");
  const TheoryDescriptor single(kind, phi.dims());
  const WeightedPureState phi_m = tensor_power(single, phi, m);
  const double bound = std::exp2(-double(m) * c);
  ExtensivityCheck out;
  auto record = [&](double overlap) {
    ++out.checked;
    out.worst_ratio = std::max(out.worst_ratio, overlap / bound);
    if (overlap > bound + tol) ++out.violations;
  };
  const ComplexVector& v = phi_m.vector();
  switch (kind) {
    case TheoryKind::Coherence:
      for (Eigen::Index i = 0; i < v.size(); ++i) record(std::norm(v(i)));
      break;
    case TheoryKind::Purity:
      record(1.0 / double(v.size()));
      break;
    case TheoryKind::Entanglement: {
      const TheoryDescriptor theory(kind, phi_m.dims());
      const auto da = static_cast<Eigen::Index>(phi_m.dims()[0]), db = static_cast<Eigen::Index>(phi_m.dims()[1]);
      // Amplitude matrix Psi(a, b); <a x b|phi> = sum conj(a_i) conj(b_j) Psi_ij.
      ComplexMatrix psi(da, db);
      for (Eigen::Index i = 0; i < da; ++i) psi.row(i) = v.segment(i * db, db).transpose();
      const Schmidt sd = schmidt(WeightedPureState(v, phi_m.dims()));
      record(sd.coefficients(0) * sd.coefficients(0));
      Rng rng(seed);
      for (std::size_t t = 0; t < trials; ++t) {
        const ComplexVector a = random_unit_vector(static_cast<std::size_t>(da), rng);
        const ComplexVector b = random_unit_vector(static_cast<std::size_t>(db), rng);
        const cplx amp = (a.adjoint() * psi * b.conjugate())(0, 0);
        record(std::norm(amp));
      }
      break;
    }
  }
  out.passed = out.violations == 0;
  return out;
}

GentleMeasurement gentle_measurement(const DensityOperator& rho, const ComplexMatrix& q) {
  if (q.rows() != static_cast<Eigen::Index>(rho.dim()) || q.cols() != q.rows())
    fail(ErrorCode::DimensionMismatch, "measurement operator has the wrong shape");
  const ComplexMatrix root = sqrtm_psd(q);
  GentleMeasurement g;
  g.success = (q * rho.matrix()).trace().real();
  g.disturbance = trace_norm(rho.matrix() - root * rho.matrix() * root);
  return g;
}

DensityOperator canonical_mixing_state(TheoryKind kind, const WeightedPureState& phi_m) {
  const std::size_t d = phi_m.dim();
  if (d > kMaxOutputDim) fail(ErrorCode::UnsupportedInput, "target tensor power is too large to build densely");
  if (kind == TheoryKind::Entanglement) {
    const ComplexVector& v = phi_m.vector();
    return loose_state((identity(d) - v * v.adjoint()) / (double(d) - 1.0), phi_m.dims());
  }
  return DensityOperator::maximally_mixed(phi_m.dims());
}

double effect_epsilon(double eps) {
  if (!(eps >= 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be nonnegative");
  return eps >= 0.5 ? 1.0 : 1.0 - std::sqrt(1.0 - 2.0 * eps);
}

namespace {

bool flat(const RealVector& p, double tol) {
  return p.size() > 0 && (p.array() - p(0)).abs().maxCoeff() < tol;
}

}  // namespace

bool is_maximally_resourceful(TheoryKind kind, const WeightedPureState& phi) {
  switch (kind) {
    case TheoryKind::Coherence: return flat(phi.vector().cwiseAbs2(), 1e-10);
    case TheoryKind::Purity: return true;
    case TheoryKind::Entanglement: {
      if (phi.dims().size() != 2 || phi.dims()[0] != phi.dims()[1]) return false;
      const Schmidt sd = schmidt(WeightedPureState(phi.vector(), phi.dims()));
      return static_cast<std::size_t>(sd.coefficients.size()) == phi.dims()[0] && flat(sd.coefficients, 1e-10);
    }
  }
  return false;
}

TargetRequirement target_requirement(TheoryKind kind, const WeightedPureState& phi, std::size_t m, double delta) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (m == 0) fail(ErrorCode::InvalidArgument, "m must be positive");
  TargetRequirement req;
  req.condition = "direct";
  const double dm = std::pow(double(phi.dim()), double(m));
  auto from_s = [](double s) { return std::isfinite(s) ? std::log2(1.0 + s) : kInf; };
  // Mixing a maximally resourceful D-level state with I/D at weight s gives
  // R_g = (D - 1)/(1 + s); solve for LR_g = delta.
  auto uniform_ray = [&](double d) {
    if (delta == 0) return kInf;
    return std::max(0.0, (d - 1.0) / (std::exp2(delta) - 1.0) - 1.0);
  };
  if (is_maximally_resourceful(kind, phi)) {
    switch (kind) {
      case TheoryKind::Coherence:
        req.value = from_s(uniform_ray(dm));
        if (delta == 0) req.notes.push_back("free robustness of a coherent target is infinite");
        return req;
      case TheoryKind::Purity:
        req.value = from_s(uniform_ray(dm));
        req.exact = false;
        req.notes.push_back("mixing state fixed to I/D; requirement is an upper estimate");
        return req;
      case TheoryKind::Entanglement:
        req.value = from_s(std::max(0.0, std::pow(double(phi.dims()[0]), double(m)) / std::exp2(delta) - 1.0));
        return req;
    }
  }
  // No closed form for phi^m: fall back to the single-copy condition.
  req.condition = "single_copy";
  const TheoryDescriptor theory(kind, phi.dims());
  const auto r = delta_free_robustness(theory, phi.density(), delta / double(m));
  req.value = std::isfinite(r.value) ? double(m) * std::log2(1.0 + 2.0 * r.value) : kInf;
  req.exact = r.exact;
  req.notes.push_back("single-copy condition m log2(1 + 2 R^{delta/m}(phi))");
  if (!r.exact) req.notes.push_back("R^{delta/m}(phi) is an upper estimate; requirement stays safe");
  return req;
}

DistillationMap build_distillation_map(const TheoryDescriptor& theory, const DensityOperator& rho,
                                       const WeightedPureState& phi, std::size_t m, double delta, double eps,
                                       const DistillationOptions& opts) {
  SmoothingBallSpec spec = opts.smoothing;
  spec.epsilon = effect_epsilon(eps);
  spec.ball = BallKind::Pure;
  return build_distillation_map(theory, rho, g_min_smoothed(theory, rho, spec), phi, m, delta, eps, opts);
}

DistillationMap build_distillation_map(const TheoryDescriptor& theory, const DensityOperator& rho,
                                       const SmoothedGmin& effect, const WeightedPureState& phi, std::size_t m,
                                       double delta, double eps, const DistillationOptions& opts) {
  if (delta < 0) fail(ErrorCode::DeltaNegative, "delta must be nonnegative");
  if (!(eps >= 0.0) || eps >= 0.5) fail(ErrorCode::InvalidArgument, "the construction needs 0 <= epsilon < 1/2");
  if (theory.dim() != rho.dim()) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
  if (std::abs(phi.weight() - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "target must be normalized");

  const TargetRequirement req = target_requirement(theory.kind(), phi, m, delta);
  if (!effect.pure_argmax) {
    throw HypothesisNotMet("pure smoothing ball is empty, so no effect is available", effect.value, req.value);
  }
  const WeightedPureState& psibar = *effect.pure_argmax;
  const double lhs = -std::log2(max_overlap(theory, psibar).value);
  const bool met = lhs >= req.value - 1e-12;
  if (!met && !opts.allow_unverified) {
    throw HypothesisNotMet("G_min of the smoothed effect is below the requirement for rate " + std::to_string(m),
                           lhs, req.value);
  }

  const TheoryDescriptor single(theory.kind(), phi.dims());
  if (std::pow(double(phi.dim()), double(m)) > double(kMaxOutputDim))
    fail(ErrorCode::UnsupportedInput, "target tensor power is too large to build densely");
  WeightedPureState phi_m = tensor_power(single, phi, m);
  DensityOperator pi = canonical_mixing_state(theory.kind(), phi_m);

  DistillationMap out{Channel::measure_prepare(psibar.projector(), phi_m, pi, rho.dims()),
                      m,
                      lhs,
                      req.value,
                      req.condition,
                      met,
                      effect_epsilon(eps),
                      0.0,
                      0.0,
                      false,
                      req.notes};
  if (!met) out.notes.push_back("unverified: the sufficient condition fails; the map may not be delta-RG");

  out.effect_overlap = (psibar.projector() * rho.matrix()).trace().real();
  const DensityOperator image = apply(out.channel, rho);
  const ComplexVector& t = phi_m.vector();
  out.fidelity_sq = (t.adjoint() * image.matrix() * t)(0, 0).real();
  out.fidelity_guarantee = out.fidelity_sq >= out.effect_overlap - 1e-9 && out.effect_overlap >= 1.0 - 2.0 * eps - 1e-9;
  if (!effect.exact) out.notes.push_back("effect found by heuristic search");
  return out;
}

}  // namespace rtd
