#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "bounds.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "random.hpp"

namespace rtd {

namespace {

constexpr double kBaseTol = 1e-9;

class Checker {
 public:
  Checker(SuiteResult& r, double scale) : r_(r), scale_(scale) {}

  void le(double lhs, double rhs, double base, const std::string& check) {
    ++r_.checks;
    const double t = base * scale_;
    if (scale_ < 0 || (!(lhs <= rhs + t) && !(std::isinf(lhs) && lhs == rhs))) r_.failures.push_back({r_.name, check, lhs, rhs, t});
  }
  void near(double a, double b, double base, const std::string& check) {
    ++r_.checks;
    const double t = base * scale_;
    if (scale_ < 0 || (a != b && !(std::abs(a - b) <= t))) r_.failures.push_back({r_.name, check, a, b, t});
  }
  void truth(bool ok, const std::string& check) {
    ++r_.checks;
    if (!ok || scale_ < 0) r_.failures.push_back({r_.name, check, ok ? 1.0 : 0.0, 1.0, 0.0});
  }

 private:
  SuiteResult& r_;
  double scale_;
};

std::string tag(const std::string& what, std::size_t d) { return what + " d=" + std::to_string(d); }

DensityOperator mix(const DensityOperator& rho, const DensityOperator& gamma, double s) {
  return DensityOperator((rho.matrix() + s * gamma.matrix()) / (1.0 + s), rho.dims(), 1e-7);
}

double lr(const DensityOperator& rho, TheoryKind kind) {
  return global_log_robustness(TheoryDescriptor(kind, rho.dims()), rho);
}

// ---- suites -----------------------------------------------------------------

void suite_extensivity(Checker& ck, Rng& rng, const VerifyOptions& o) {
  for (std::size_t d = 2; d <= o.dim_max; ++d) {
    for (std::size_t m = 1; m <= 3 && std::pow(double(d), double(m)) <= 64; ++m) {
      const auto phi = maximally_coherent(d);
      const double c = extensive_constant(TheoryKind::Coherence, phi).c;
      const auto res = verify_extensivity(TheoryKind::Coherence, phi, m, c, 0, o.seed, o.tol);
      ck.le(double(res.violations), 0.0, 0.0, tag("coherence phi_c m=" + std::to_string(m), d));
      ck.le(res.worst_ratio, 1.0, kBaseTol, tag("coherence phi_c ratio m=" + std::to_string(m), d));
      const auto inflated = verify_extensivity(TheoryKind::Coherence, phi, m, 1.1 * c, 0, o.seed, o.tol);
      ck.truth(!inflated.passed, tag("coherence inflated c detected m=" + std::to_string(m), d));
    }
    for (std::size_t t = 0; t < o.trials; ++t) {
      for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Purity}) {
        const auto phi = random_pure_state({d}, rng);
        const double c = extensive_constant(kind, phi).c;
        const std::size_t m = 1 + t % 3;
        if (std::pow(double(d), double(m)) > 64) continue;
        const auto res = verify_extensivity(kind, phi, m, c, 0, o.seed + t, o.tol);
        ck.le(res.worst_ratio, 1.0, kBaseTol, tag(std::string(to_string(kind)) + " random phi", d));
      }
    }
  }
  for (std::size_t d = 2; d * d <= std::max<std::size_t>(4, o.dim_max * o.dim_max) && d <= 4; ++d) {
    for (std::size_t m = 1; m <= 3 && std::pow(double(d * d), double(m)) <= 256; ++m) {
      const auto phi = maximally_entangled(d);
      const double c = extensive_constant(TheoryKind::Entanglement, phi).c;
      const auto res = verify_extensivity(TheoryKind::Entanglement, phi, m, c, 200, o.seed, o.tol);
      ck.le(res.worst_ratio, 1.0, kBaseTol, tag("entanglement phi_e m=" + std::to_string(m), d));
    }
  }
}

void suite_robustness(Checker& ck, Rng& rng, const VerifyOptions& o) {
  for (std::size_t d = 2; d <= o.dim_max; ++d) {
    const TheoryDescriptor coh(TheoryKind::Coherence, {d}), pur(TheoryKind::Purity, {d});
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto psi = random_pure_state({d}, rng);
      const double l1 = psi.vector().cwiseAbs().sum();
      const auto rho = psi.density();
      ck.near(global_robustness(coh, rho).value, l1 * l1 - 1.0, 1e3 * kBaseTol, tag("coherence pure closed form", d));
      if (t < o.trials / 2)
        ck.near(coherence_global_robustness_cutting_plane(rho).value, l1 * l1 - 1.0, 1e3 * kBaseTol,
                tag("coherence pure cutting plane", d));

      const auto sigma = random_mixed_state({d}, rng);
      const auto eig = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(sigma.matrix()).eigenvalues();
      ck.near(global_robustness(pur, sigma).value, double(d) * eig.maxCoeff() - 1.0, kBaseTol,
              tag("purity closed form", d));
      ck.near(global_robustness(pur, sigma).value, grid_global_robustness(pur, sigma, 200), 1e3 * kBaseTol,
              tag("purity vs oracle", d));
      if (d <= 3 && t < o.trials / 2) {
        const double cp = global_robustness(coh, sigma).value;
        ck.near(cp, grid_global_robustness(coh, sigma, 200), 1e6 * kBaseTol, tag("coherence mixed vs oracle", d));
      }

      // Ordering: R_g <= R^0 = R_f and R^delta <= R^0. R_g and R^delta are not
      // comparable for delta > 0 (a delta-free state has R^delta = 0).
      const auto& x = (d == 2 || t % 2) ? sigma : rho;
      const auto& th = (d == 2) ? coh : pur;
      const double f = free_robustness(th, x).value;
      ck.le(global_robustness(th, x).value, delta_free_robustness(th, x, 0.0).value, 1e3 * kBaseTol,
            tag("global <= delta-free at 0", d));
      for (double delta : {0.1, 1.0}) {
        const auto r = delta_free_robustness(th, x, delta);
        ck.le(r.value, f, 1e3 * kBaseTol, tag("delta-free <= free", d));
        if (r.free_point && std::isfinite(r.value))
          ck.le(lr(*r.free_point, th.kind()), delta, 1e3 * kBaseTol, tag("delta-free certificate", d));
      }
    }
  }
  for (std::size_t t = 0; t < o.trials; ++t) {
    const auto sigma = random_mixed_state({2}, rng);
    ck.near(coherence_global_robustness_cutting_plane(sigma).value, 2.0 * std::abs(sigma.matrix()(0, 1)),
            1e3 * kBaseTol, "coherence qubit cutting plane vs 2|rho01|");
  }
  for (std::size_t d = 2; d <= o.dim_max; ++d) {
    double prev = kInf;
    for (double delta : {0.1, 0.25, 0.5, 1.0, 2.0}) {
      const double r = delta_robustness_maximally_coherent(d, delta);
      ck.le(r, prev, kBaseTol, tag("delta monotonicity phi_c", d));
      prev = r;
    }
  }
}

void suite_subadditivity(Checker& ck, Rng& rng, const VerifyOptions& o) {
  for (std::size_t d1 = 2; d1 <= o.dim_max; ++d1) {
    for (std::size_t d2 = 2; d2 <= o.dim_max; ++d2) {
      for (std::size_t t = 0; t < o.trials; ++t) {
        const auto a = random_pure_state({d1}, rng), b = random_pure_state({d2}, rng);
        const auto ab = tensor(a, b).density();
        ck.le(lr(ab, TheoryKind::Coherence), lr(a.density(), TheoryKind::Coherence) + lr(b.density(), TheoryKind::Coherence),
              kBaseTol, tag("coherence pure", d1 * d2));
        const auto x = random_mixed_state({d1}, rng), y = random_mixed_state({d2}, rng);
        ck.le(lr(tensor(x, y), TheoryKind::Purity), lr(x, TheoryKind::Purity) + lr(y, TheoryKind::Purity), kBaseTol,
              tag("purity", d1 * d2));
      }
    }
  }
}

void suite_tensor_rule(Checker& ck, Rng& rng, const VerifyOptions& o) {
  std::uniform_real_distribution<double> slack(0.0, 0.5);
  for (std::size_t d1 = 2; d1 <= o.dim_max; ++d1) {
    for (std::size_t d2 = 2; d2 <= o.dim_max; ++d2) {
      for (std::size_t t = 0; t < o.trials; ++t) {
        for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Purity}) {
          const bool pure = kind == TheoryKind::Coherence;
          const auto a = pure ? random_pure_state({d1}, rng).density() : random_mixed_state({d1}, rng);
          const auto b = pure ? random_pure_state({d2}, rng).density() : random_mixed_state({d2}, rng);
          const double delta = std::max(lr(a, kind), lr(b, kind)) + slack(rng);
          ck.le(lr(tensor(a, b), kind), 2.0 * delta, kBaseTol, tag(std::string(to_string(kind)), d1 * d2));
        }
      }
    }
  }
}

void suite_convexity(Checker& ck, Rng& rng, const VerifyOptions& o) {
  for (std::size_t d = 2; d <= o.dim_max; ++d) {
    const TheoryDescriptor pur(TheoryKind::Purity, {d}), coh(TheoryKind::Coherence, {d});
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto rho = random_mixed_state({d}, rng);
      const double r = global_robustness(pur, rho).value;
      const auto gamma = DensityOperator::maximally_mixed({d});
      for (double s : {0.1, 1.0, 10.0})
        ck.le(global_robustness(pur, mix(rho, gamma, s)).value, r / (1.0 + s), kBaseTol, tag("purity", d));

      if (d <= 3) {
        const auto psi = random_pure_state({d}, rng).density();
        const double rc = global_robustness(coh, psi).value;
        const auto g = random_free_state(coh, o.seed + 7919 * t + d);
        for (double s : {0.1, 1.0, 10.0})
          ck.le(global_robustness(coh, mix(psi, g, s)).value, rc / (1.0 + s), 1e3 * kBaseTol, tag("coherence", d));
      }
    }
  }
}

void suite_pseudo_subadditivity(Checker& ck, Rng& rng, const VerifyOptions& o) {
  for (std::size_t d = 2; d <= o.dim_max; ++d) {
    for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Entanglement}) {
      if (kind == TheoryKind::Entanglement && d > 3) continue;
      const auto phi = unit_state(kind, d);
      const TheoryDescriptor th(kind, phi.dims());
      for (std::size_t m = 1; m <= 3; ++m) {
        for (double delta : {0.5, 1.0}) {
          const auto ps = pseudo_subadditive_bound(th, phi.density(), m, delta);
          const std::string what = std::string(to_string(kind)) + " m=" + std::to_string(m);
          ck.truth(ps.direct.has_value(), tag(what + " direct available", d));
          if (ps.direct) ck.le(*ps.direct, ps.bound1, 1e3 * kBaseTol, tag(what + " direct <= bound1", d));
          ck.le(ps.bound1, ps.bound2, 1e3 * kBaseTol, tag(what + " bound1 <= bound2", d));
        }
      }
    }
    const TheoryDescriptor pur(TheoryKind::Purity, {d});
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto rho = random_mixed_state({d}, rng);
      const auto ps = pseudo_subadditive_bound(pur, rho, 1 + t % 3, 0.5);
      ck.le(ps.bound1, ps.bound2, 1e3 * kBaseTol, tag("purity bound1 <= bound2", d));
    }
  }
}

void suite_sandwich(Checker& ck, Rng& rng, const VerifyOptions& o) {
  const double deltas[] = {0.0, 0.1, 1.0}, epss[] = {0.0, 0.01, 0.1};
  for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Purity, TheoryKind::Entanglement}) {
    const auto phi = unit_state(kind, 2);
    for (std::size_t d = 2; d <= o.dim_max; ++d) {
      if (kind == TheoryKind::Entanglement && d > 3) continue;
      const Dims dims = kind == TheoryKind::Entanglement ? Dims{d, d} : Dims{d};
      const TheoryDescriptor th(kind, dims);
      const std::size_t n = std::max<std::size_t>(1, o.trials / 4);
      for (std::size_t t = 0; t < n; ++t) {
        const auto rho = random_pure_state(dims, rng).density();
        double prev_row[3] = {-kInf, -kInf, -kInf};
        for (double delta : deltas) {
          double prev = -kInf;
          for (std::size_t j = 0; j < 3; ++j) {
            const double eps = epss[j];
            const auto rep = rate_interval(th, rho, phi, delta, eps);
            const std::string what = std::string(to_string(kind));
            if (rep.exact) ck.le(double(rep.lower), rep.upper, kBaseTol, tag(what + " lower <= upper", d));
            ck.le(prev, rep.upper, kBaseTol, tag(what + " upper nondecreasing in eps", d));
            ck.le(prev_row[j], rep.upper, kBaseTol, tag(what + " upper nondecreasing in delta", d));
            prev = prev_row[j] = rep.upper;
            if (rep.lower > 0) {
              const auto map = build_distillation_map(th, rho, phi, rep.lower, delta, eps);
              ck.le(1.0 - 2.0 * eps, map.fidelity_sq, kBaseTol, tag(what + " fidelity guarantee", d));
              CertifyOptions co;
              co.sample_size = 100;
              co.seed = o.seed + t;
              const auto cert = certify_delta_rg(map.channel, kind, delta, co);
              ck.le(cert.max_output_lr, delta, 1e3 * kBaseTol, tag(what + " map is delta-RG", d));
            }
          }
        }
      }
    }
  }
}

void suite_fidelity(Checker& ck, Rng& rng, const VerifyOptions& o) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t d = 2; d <= o.dim_max; ++d) {
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto rho = random_mixed_state({d}, rng, 1 + t % d), sigma = random_mixed_state({d}, rng);
      const double f = fidelity(rho, sigma);
      ck.le(1.0 - f, 0.5 * trace_norm(rho.matrix() - sigma.matrix()), kBaseTol, tag("Fuchs-van de Graaf", d));
      ck.near(f, fidelity(sigma, rho), 1e-6, tag("fidelity symmetric", d));

      // Gentle measurement with a random effect 0 <= Q <= I.
      const ComplexMatrix u = random_unitary(d, rng);
      RealVector q(static_cast<Eigen::Index>(d));
      for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = t % 2 ? std::round(unif(rng)) : unif(rng);
      const ComplexMatrix qm = u * q.cast<cplx>().asDiagonal() * u.adjoint();
      const auto g = gentle_measurement(rho, qm);
      const double eps = std::max(0.0, (1.0 - g.success) / 2.0);
      ck.le(g.disturbance, 2.0 * std::sqrt(2.0 * eps), 1e3 * kBaseTol, tag("gentle measurement", d));
    }
  }
}

void suite_divergence(Checker& ck, Rng& rng, const VerifyOptions& o) {
  const std::size_t n = std::max<std::size_t>(1, o.trials / 4);
  for (std::size_t d = 2; d <= std::min<std::size_t>(o.dim_max, 3); ++d) {
    for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Purity}) {
      const TheoryDescriptor th(kind, {d});
      for (std::size_t t = 0; t < n; ++t) {
        const auto rho = t % 2 ? random_mixed_state({d}, rng) : random_pure_state({d}, rng).density();
        const std::string what = std::string(to_string(kind));
        ck.truth(std::isinf(free_robustness(th, rho).value), tag(what + " free robustness diverges", d));
        for (double delta : {0.01, 0.1, 1.0})
          ck.truth(std::isfinite(delta_free_robustness(th, rho, delta).value),
                   tag(what + " delta-free robustness finite", d));
      }
    }
  }
}

struct SuiteDef {
  const char* name;
  std::function<void(Checker&, Rng&, const VerifyOptions&)> run;
};

const std::vector<SuiteDef>& suites() {
  static const std::vector<SuiteDef> all = {
      {"extensivity", suite_extensivity},
      {"robustness", suite_robustness},
      {"subadditivity", suite_subadditivity},
      {"tensor-rule", suite_tensor_rule},
      {"convexity", suite_convexity},
      {"pseudo-subadditivity", suite_pseudo_subadditivity},
      {"sandwich", suite_sandwich},
      {"fidelity", suite_fidelity},
      {"divergence", suite_divergence},
  };
  return all;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : suites()) v.emplace_back(s.name);
    return v;
  }();
  return names;
}

VerifyReport run_verify(const std::string& suite, const VerifyOptions& opts) {
  if (opts.dim_max < 2) fail(ErrorCode::InvalidArgument, "dim-max must be at least 2");
  if (opts.dim_max > 8) fail(ErrorCode::UnsupportedInput, "dim-max above 8 is not supported");
  bool found = suite == "all";
  for (const auto& s : suites()) found = found || suite == s.name;
  if (!found) fail(ErrorCode::InvalidArgument, "unknown suite: " + suite);

  VerifyReport rep;
  const double scale = opts.tol / kBaseTol;
  std::uint64_t index = 0;
  for (const auto& s : suites()) {
    ++index;
    if (suite != "all" && suite != s.name) continue;
    SuiteResult r;
    r.name = s.name;
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(index)};
    Rng rng(seq);
    Checker ck(r, scale);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      s.run(ck, rng, opts);
    } catch (const std::exception& e) {
      r.failures.push_back({r.name, std::string("exception: ") + e.what(), 0.0, 0.0, 0.0});
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.passed = rep.passed && r.failures.empty();
    rep.suites.push_back(std::move(r));
  }
  return rep;
}

}  // namespace rtd
