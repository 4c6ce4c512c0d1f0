// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "bounds.hpp"
#include "oracles.hpp"
#include "random.hpp"
#include "state_io.hpp"

using namespace rtd;

namespace {

// Collects the worst violation seen for one criterion.
struct Tally {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures++ == 0) first = what;
  }
  void within(double a, double b, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": " << a << " vs " << b << " (tol " << tol << ")";
    expect(std::abs(a - b) <= tol || (a == b), s.str());
  }
  void at_most(double a, double b, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": " << a << " > " << b << " + " << tol;
    expect(a <= b + tol, s.str());
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 = no runtime requirement
  std::function<void(Tally&)> body;
};

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(RTD_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tag(const std::string& what, double x) {
  std::ostringstream s;
  s << what << " " << x;
  return s.str();
}

double s_min_of(const DensityOperator& rho) { return s_min(rho); }

const std::size_t keep_b[] = {1};

void c1_extensivity_constants(Tally& t) {
  for (std::size_t m = 1; m <= 4; ++m) {
    const std::size_t d = std::size_t(1) << m;
    t.within(g_min(TheoryDescriptor(TheoryKind::Coherence, {d}), maximally_coherent(d)), double(m), 1e-9,
             tag("g_min(phi_c^m) m =", double(m)));
    t.within(g_min(TheoryDescriptor(TheoryKind::Entanglement, {d, d}), maximally_entangled(d)), double(m), 1e-9,
             tag("g_min(phi_e^m) m =", double(m)));
  }
}

void c2_operator_inequality(Tally& t) {
  for (std::size_t m = 1; m <= 3; ++m) {
    const auto c = verify_extensivity(TheoryKind::Coherence, maximally_coherent(2), m, 1.0, 1000, 1, 1e-9);
    t.expect(c.passed && c.violations == 0, tag("coherence violations at m =", double(m)));
    const auto e = verify_extensivity(TheoryKind::Entanglement, maximally_entangled(2), m, 1.0, 1000, 2, 1e-9);
    t.expect(e.passed && e.violations == 0 && e.checked >= 1000, tag("entanglement violations at m =", double(m)));
  }
}

void c3_global_closed_forms(Tally& t) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = 2 + std::size_t(i) % 7;
    const auto psi = random_pure_state({d}, rng);
    const double l1 = psi.vector().cwiseAbs().sum();
    t.within(coherence_global_robustness_cutting_plane(psi.density()).value, l1 * l1 - 1.0, 1e-6,
             tag("coherence pure solver vs closed form, d =", double(d)));
  }
  for (int i = 0; i < 200; ++i) {
    const auto q = random_mixed_state({2}, rng);
    t.within(coherence_global_robustness_cutting_plane(q).value, 2.0 * std::abs(q.matrix()(0, 1)), 1e-6,
             "qubit solver vs 2|rho01|");
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = 2 + std::size_t(i) % 7;
    const auto rho = random_mixed_state({d}, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    const TheoryDescriptor pur(TheoryKind::Purity, {d});
    t.within(global_robustness(pur, rho).value, double(d) * es.eigenvalues().maxCoeff() - 1.0, 1e-9,
             "purity d lambda_max - 1");
  }
  for (int i = 0; i < 40; ++i) {
    const std::size_t d = 2 + std::size_t(i) % 2;
    const auto rho = random_mixed_state({d}, rng);
    const TheoryDescriptor coh(TheoryKind::Coherence, {d}), pur(TheoryKind::Purity, {d});
    t.within(global_robustness(coh, rho).value, grid_global_robustness(coh, rho, 100), 1e-3,
             tag("coherence vs grid oracle, d =", double(d)));
    t.within(global_robustness(pur, rho).value, grid_global_robustness(pur, rho, 100), 1e-3,
             tag("purity vs grid oracle, d =", double(d)));
  }
}

void c4_log_robustness_anchor(Tally& t) {
  for (std::size_t m = 1; m <= 4; ++m) {
    const std::size_t d = std::size_t(1) << m;
    t.within(global_log_robustness(TheoryDescriptor(TheoryKind::Entanglement, {d, d}),
                                   maximally_entangled(d).density()),
             double(m), 1e-9, tag("LR_g(phi_e^m) m =", double(m)));
    t.within(global_log_robustness(TheoryDescriptor(TheoryKind::Coherence, {d}), maximally_coherent(d).density()),
             double(m), 1e-9, tag("LR_g(phi_c^m) m =", double(m)));
  }
}

void c5_delta_free_closed_form(Tally& t) {
  for (std::size_t m = 1; m <= 3; ++m) {
    const std::size_t d = std::size_t(1) << m;
    const TheoryDescriptor th(TheoryKind::Coherence, {d});
    const auto phi = maximally_coherent(d).density();
    for (double delta : {0.25, 0.5, 1.0, 2.0}) {
      const double closed = std::max(0.0, (std::exp2(double(m)) - 1.0) / (std::exp2(delta) - 1.0) - 1.0);
      const double bis = bisection_delta_robustness(th, phi, delta, DensityOperator::maximally_mixed({d}));
      t.within(bis, closed, 1e-6, tag("bisection vs closed form, m = " + std::to_string(m) + " delta =", delta));
      t.within(delta_free_robustness(th, phi, delta).value, closed, 1e-6,
               tag("library vs closed form, m = " + std::to_string(m) + " delta =", delta));
    }
  }
}

void c6_divergence_finiteness(Tally& t) {
  Rng rng(6);
  for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Purity}) {
    for (int i = 0; i < 50; ++i) {
      const std::size_t d = 2 + std::size_t(i) % 3;
      const TheoryDescriptor th(kind, {d});
      const auto rho = random_mixed_state({d}, rng);
      if (is_free(th, rho).member) continue;
      t.expect(std::isinf(free_robustness(th, rho).value), std::string(to_string(kind)) + " free robustness finite");
      RobustnessOptions opts;
      opts.seed = std::uint64_t(i);
      for (double delta : {0.01, 0.1, 1.0})
        t.expect(std::isfinite(delta_free_robustness(th, rho, delta, opts).value),
                 tag(std::string(to_string(kind)) + " delta-free robustness infinite at delta =", delta));
    }
  }
}

void c7_structural(Tally& t) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d1 = 2 + std::size_t(i) % 3, d2 = 2 + std::size_t(i / 3) % 3;
    const TheoryKind kind = i % 2 ? TheoryKind::Coherence : TheoryKind::Purity;
    const bool pure = kind == TheoryKind::Coherence;
    const auto a = pure ? random_pure_state({d1}, rng).density() : random_mixed_state({d1}, rng);
    const auto b = pure ? random_pure_state({d2}, rng).density() : random_mixed_state({d2}, rng);
    const DensityOperator ab(tensor(a, b).matrix(), {d1 * d2});
    const double la = global_log_robustness(TheoryDescriptor(kind, {d1}), a);
    const double lb = global_log_robustness(TheoryDescriptor(kind, {d2}), b);
    const double lab = global_log_robustness(TheoryDescriptor(kind, {d1 * d2}), ab);
    t.at_most(lab, la + lb, 1e-9, "sub-additivity");
    const double delta = std::max(la, lb);
    t.at_most(lab, 2.0 * delta, 1e-9, "tensor rule");
  }
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 2 + std::size_t(i) % 4;
    const TheoryDescriptor pur(TheoryKind::Purity, {d});
    const auto rho = random_mixed_state({d}, rng);
    const double r = global_robustness(pur, rho).value;
    for (double s : {0.1, 1.0, 10.0}) {
      const DensityOperator mix((rho.matrix() + s * DensityOperator::maximally_mixed({d}).matrix()) / (1.0 + s), {d});
      t.at_most(global_robustness(pur, mix).value, r / (1.0 + s), 1e-9, tag("convexity bound, s =", s));
    }
  }
}

void c8_pseudo_subadditivity(Tally& t) {
  for (std::size_t d : {2, 3, 4}) {
    const TheoryDescriptor th(TheoryKind::Coherence, {d});
    for (std::size_t m = 1; m <= 3; ++m)
      for (double delta : {0.5, 1.0}) {
        const auto p = pseudo_subadditive_bound(th, maximally_coherent(d).density(), m, delta);
        t.expect(p.direct.has_value(), "direct value available");
        if (p.direct) t.at_most(*p.direct, p.bound1, 1e-6, "direct <= bound1");
        t.at_most(p.bound1, p.bound2, 1e-6, "bound1 <= bound2");
      }
  }
}

void c9_corollary2(Tally& t) {
  for (std::size_t m = 1; m <= 2; ++m) {
    const std::size_t r = std::size_t(1) << m;
    const TheoryDescriptor th(TheoryKind::Entanglement, {r, r});
    const auto psi = maximally_entangled(r).density();
    const auto phi = maximally_entangled(2);
    const auto rep = rate_interval(th, psi, phi, 0.0, 0.0);
    t.expect(rep.lower == m, tag("lower at m =", double(m)));
    t.within(rep.upper, double(m), 1e-9, tag("upper at m =", double(m)));
    const auto lb = lower_bound(th, psi, phi, 0.0, 0.0, m + 1);
    t.expect(lb.map.has_value(), "map constructed");
    if (!lb.map) continue;
    t.within(lb.map->fidelity_sq, 1.0, 1e-9, "fidelity squared");
    CertifyOptions opts;
    opts.sample_size = 1000;
    opts.seed = 9;
    const auto cert = certify_delta_rg(lb.map->channel, TheoryKind::Entanglement, 0.0, opts);
    t.expect(cert.verdict, "certify_delta_rg verdict at delta = 0");
    t.expect(cert.checked_points.size() >= 1000, "at least 1000 product inputs");
    for (const auto& p : cert.checked_points)
      if (p.target_overlap) t.at_most(*p.target_overlap, std::exp2(-double(m)), 1e-9, "target overlap");
  }
}

void c10_corollary1(Tally& t) {
  Rng rng(10);
  for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Entanglement, TheoryKind::Purity}) {
    for (int i = 0; i < 100; ++i) {
      const std::size_t d = 2 + std::size_t(i) % 3;
      const Dims dims = kind == TheoryKind::Entanglement ? Dims{d, d} : Dims{d};
      const TheoryDescriptor th(kind, dims);
      const auto psi = random_pure_state(dims, rng);
      const auto phi = unit_state(kind, 2);
      double expect = 0.0;
      switch (kind) {
        case TheoryKind::Coherence: expect = s_min_of(dephase(psi.density())); break;
        case TheoryKind::Entanglement: expect = s_min_of(partial_trace(psi.density(), keep_b)); break;
        case TheoryKind::Purity: expect = std::log2(double(d)); break;  // G_min of any pure state
      }
      const double c = extensive_constant(kind, phi).c;
      const double u0 = upper_bound(th, psi.density(), phi, 0.0, 0.0).value;
      t.within(u0, expect / c, 1e-9, std::string(to_string(kind)) + " upper at delta = eps = 0");
      for (double delta : {0.1, 1.0})
        t.within(upper_bound(th, psi.density(), phi, delta, 0.0).value - u0, std::log2(1.0 + delta) / c, 1e-9,
                 tag(std::string(to_string(kind)) + " delta offset at", delta));
    }
  }
}

void c11_fidelity_guarantee(Tally& t) {
  Rng rng(11);
  DistillationOptions opts;
  opts.allow_unverified = true;
  const double deltas[] = {0.0, 0.1, 1.0}, epsilons[] = {0.0, 0.01, 0.1};
  for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Entanglement, TheoryKind::Purity}) {
    const Dims dims = kind == TheoryKind::Entanglement ? Dims{2, 2} : Dims{4};
    const TheoryDescriptor th(kind, dims);
    const auto phi = unit_state(kind, 2);
    for (int i = 0; i < 20; ++i) {
      const auto rho = random_pure_state(dims, rng).density();
      for (double delta : deltas)
        for (double eps : epsilons) {
          for (std::size_t m = 1; m <= 2; ++m) {
            const auto map = build_distillation_map(th, rho, phi, m, delta, eps, opts);
            t.at_most(1.0 - 2.0 * eps, map.fidelity_sq, 1e-9, "constructed map fidelity");
            t.expect(map.fidelity_guarantee, "fidelity_guarantee flag");
          }
          const auto rep = rate_interval(th, rho, phi, delta, eps);
          if (rep.fidelity_sq) t.at_most(1.0 - 2.0 * eps, *rep.fidelity_sq, 1e-9, "rate_interval map fidelity");
        }
    }
  }
}

void c12_smoothing(Tally& t) {
  Rng rng(12);
  for (TheoryKind kind : {TheoryKind::Coherence, TheoryKind::Purity}) {
    for (std::size_t d : {2, 3}) {
      const TheoryDescriptor th(kind, {d});
      for (int i = 0; i < 4; ++i) {
        const auto psi = random_pure_state({d}, rng).density();
        const auto mixed = random_mixed_state({d}, rng);
        for (double eps : {0.01, 0.05, 0.1}) {
          SmoothingBallSpec pure;
          pure.epsilon = eps;
          t.at_most(grid_smoothed_g_min(th, psi, eps, BallKind::Pure, 400), g_min_smoothed(th, psi, pure).value,
                    1e-3, tag(std::string(to_string(kind)) + " pure ball, eps =", eps));
          SmoothingBallSpec general = pure;
          general.ball = BallKind::General;
          general.seed = std::uint64_t(i);
          t.at_most(grid_smoothed_g_min(th, mixed, eps, BallKind::General, 400),
                    g_min_smoothed(th, mixed, general).value, 1e-3,
                    tag(std::string(to_string(kind)) + " general ball, eps =", eps));
        }
      }
    }
  }
}

void c13_sandwich(Tally& t) {
  Rng rng(13);
  const auto dir = std::filesystem::temp_directory_path() / "rtd_acceptance";
  std::filesystem::create_directories(dir);
  const char* theories[] = {"coherence", "entanglement", "purity"};
  for (int i = 0; i < 100; ++i) {
    const int k = i % 3;
    const Dims dims = k == 1 ? Dims{2, 2} : Dims{2 + std::size_t(i) % 3};
    const auto path = dir / ("state" + std::to_string(i) + ".json");
    std::ofstream(path) << serialize_state(random_pure_state(dims, rng)) << "\n";
    const auto r = run_cli(std::string("--theory ") + theories[k] + " --state " + path.string() +
                           " --json sweep --delta-grid 0,0.1,1 --epsilon-grid 0,0.01,0.1");
    t.expect(r.code == 0, "sweep exit code");
    if (r.code != 0) continue;
    const auto j = nlohmann::json::parse(r.out);
    for (const auto& row : j["rows"]) {
      const double upper = row["upper"].is_number() ? row["upper"].get<double>() : HUGE_VAL;
      t.at_most(row["lower"].get<double>(), upper, 1e-9, std::string(theories[k]) + " lower <= upper");
    }
  }
  std::filesystem::remove_all(dir);
  const auto v = run_cli("verify --suite all --dim-max 4 --seed 42");
  t.expect(v.code == 0, "verify --suite all --dim-max 4 --seed 42 exit code " + std::to_string(v.code));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "extensivity constants g_min(phi^m) = m", 1.0, c1_extensivity_constants},
      {2, "operator-inequality equivalence", 0.0, c2_operator_inequality},
      {3, "global robustness closed forms and grid oracle", 30.0, c3_global_closed_forms},
      {4, "global log-robustness of phi^m equals m", 0.0, c4_log_robustness_anchor},
      {5, "delta-free robustness closed form vs bisection", 10.0, c5_delta_free_closed_form},
      {6, "free robustness diverges, delta-free is finite", 0.0, c6_divergence_finiteness},
      {7, "sub-additivity, tensor rule, convexity bound", 0.0, c7_structural},
      {8, "pseudo-subadditivity chain", 0.0, c8_pseudo_subadditivity},
      {9, "perfect entanglement concentration", 60.0, c9_corollary2},
      {10, "upper bounds at zero smoothing", 0.0, c10_corollary1},
      {11, "fidelity guarantee of constructed maps", 0.0, c11_fidelity_guarantee},
      {12, "smoothing vs grid oracle at resolution 400", 60.0, c12_smoothing},
      {13, "sandwich over the CLI sweep and verify --suite all", 300.0, c13_sandwich},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Tally t;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(t);
    } catch (const std::exception& e) {
      t.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s <= 0 || secs < c.budget_s;
    const bool pass = t.failures == 0 && t.checks > 0 && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s: %zu checks, %zu failures, %.2f s", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                t.checks, t.failures, secs);
    if (c.budget_s > 0) std::printf(" (limit %.0f s)", c.budget_s);
    if (!t.first.empty()) std::printf(" first: %s", t.first.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
