#include <doctest.h>

#include "helpers.hpp"
#include "measures.hpp"
#include "random.hpp"

using namespace rtd;
using testing::diag;
using testing::pure;

namespace {
const TheoryDescriptor coh2(TheoryKind::Coherence, {2});

DensityOperator mix(const DensityOperator& rho, const DensityOperator& pi, double s) {
  return DensityOperator((rho.matrix() + s * pi.matrix()) / (1.0 + s), rho.dims());
}
}  // namespace

TEST_CASE("s_min examples") {
  CHECK(s_min(DensityOperator::maximally_mixed({2})) == doctest::Approx(1.0));
  CHECK(s_min(diag({0.8, 0.2})) == doctest::Approx(0.32192809488736235));
  CHECK(s_min(maximally_coherent(3).density()) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("g_min examples") {
  CHECK(g_min(coh2, maximally_coherent(2)) == doctest::Approx(1.0));
  for (std::size_t m = 1; m <= 4; ++m) {
    const TheoryDescriptor th(TheoryKind::Coherence, {std::size_t(1) << m});
    CHECK(g_min(th, maximally_coherent(std::size_t(1) << m)) == doctest::Approx(double(m)));
  }
  const TheoryDescriptor ent(TheoryKind::Entanglement, {2, 2});
  CHECK(g_min(ent, testing::psi82_ab()) == doctest::Approx(-std::log2(0.8)));
  const WeightedPureState half(maximally_coherent(2).vector(), {2}, 0.5);
  CHECK(g_min(coh2, half) == doctest::Approx(2.0));
}

TEST_CASE("global robustness examples") {
  const auto rc = global_robustness(coh2, maximally_coherent(2).density());
  CHECK(rc.value == doctest::Approx(1.0));
  CHECK(global_log_robustness(coh2, maximally_coherent(2).density()) == doctest::Approx(1.0));

  const auto r82 = global_robustness(coh2, testing::psi82().density());
  CHECK(r82.value == doctest::Approx(0.8));
  CHECK(global_log_robustness(coh2, testing::psi82().density()) == doctest::Approx(std::log2(1.8)));

  const TheoryDescriptor pur(TheoryKind::Purity, {2});
  CHECK(global_robustness(pur, diag({0.9, 0.1})).value == doctest::Approx(0.8));
  CHECK(global_log_robustness(coh2, diag({0.4, 0.6})) == doctest::Approx(0.0));

  for (std::size_t m = 1; m <= 3; ++m) {
    const std::size_t d = std::size_t(1) << m;
    const TheoryDescriptor c(TheoryKind::Coherence, {d});
    CHECK(global_log_robustness(c, maximally_coherent(d).density()) == doctest::Approx(double(m)));
    const TheoryDescriptor e(TheoryKind::Entanglement, {d, d});
    CHECK(global_log_robustness(e, maximally_entangled(d).density()) == doctest::Approx(double(m)));
  }
  const TheoryDescriptor ent(TheoryKind::Entanglement, {2, 2});
  Rng rng(3);
  CHECK_THROWS_AS(global_robustness(ent, random_mixed_state({2, 2}, rng)), Error);
}

TEST_CASE("coherence robustness: cutting plane agrees with the pure and qubit closed forms") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 4;
    const auto psi = random_pure_state({d}, rng);
    const double l1 = psi.vector().cwiseAbs().sum();
    const auto cp = coherence_global_robustness_cutting_plane(psi.density());
    REQUIRE(cp.value == doctest::Approx(l1 * l1 - 1.0).epsilon(1e-7));
    const auto q = random_mixed_state({2}, rng);
    const auto cq = coherence_global_robustness_cutting_plane(q);
    REQUIRE(cq.value == doctest::Approx(2.0 * std::abs(q.matrix()(0, 1))).epsilon(1e-7));
  }
}

TEST_CASE("robustness certificates reconstruct a free point") {
  Rng rng(23);
  const TheoryDescriptor c4(TheoryKind::Coherence, {4});
  for (int t = 0; t < 20; ++t) {
    const auto rho = random_mixed_state({4}, rng);
    const auto r = global_robustness(c4, rho);
    REQUIRE(r.mixing_state);
    REQUIRE(r.free_point);
    const auto fp = mix(rho, *r.mixing_state, r.value);
    REQUIRE((fp.matrix() - r.free_point->matrix()).norm() <= 1e-8);
    REQUIRE(is_free(c4, *r.free_point, 1e-7).member);
  }
}

TEST_CASE("is_delta_free examples") {
  CHECK(is_delta_free(coh2, diag({0.5, 0.5}), 0.0));
  CHECK(is_delta_free(coh2, maximally_coherent(2).density(), 1.0));
  CHECK_FALSE(is_delta_free(coh2, maximally_coherent(2).density(), 0.5));
}

TEST_CASE("free robustness examples") {
  CHECK(free_robustness(coh2, diag({0.2, 0.8})).value == 0.0);
  CHECK(free_robustness(coh2, maximally_coherent(2).density()).value == kInf);
  const TheoryDescriptor pur(TheoryKind::Purity, {3});
  CHECK(free_robustness(pur, diag({0.5, 0.3, 0.2})).value == kInf);

  const TheoryDescriptor ent(TheoryKind::Entanglement, {2, 2});
  const auto fe = free_robustness(ent, maximally_entangled(2).density());
  CHECK(fe.value == doctest::Approx(1.0));
  REQUIRE(fe.mixing_state);
  const ComplexMatrix expect =
      (ComplexMatrix::Identity(4, 4) - maximally_entangled(2).density().matrix()) / 3.0;
  CHECK((fe.mixing_state->matrix() - expect).norm() < 1e-12);
}

TEST_CASE("delta-free robustness examples") {
  CHECK(delta_free_robustness(coh2, diag({0.5, 0.5}), 0.3).value == 0.0);
  CHECK(delta_free_robustness(coh2, maximally_coherent(2).density(), 1.0).value == doctest::Approx(0.0));
  const TheoryDescriptor c4(TheoryKind::Coherence, {4});
  const auto phi2 = maximally_coherent(4).density();
  CHECK(delta_free_robustness(c4, phi2, 1.0).value == doctest::Approx(2.0));
  CHECK(delta_free_log_robustness(c4, phi2, 1.0) == doctest::Approx(std::log2(3.0)));
  CHECK(delta_free_robustness(coh2, maximally_coherent(2).density(), 0.5).value ==
        doctest::Approx(1.4142135623730945));
  CHECK(delta_free_log_robustness(coh2, diag({0.5, 0.5}), 0.2) == 0.0);

  for (std::size_t m = 1; m <= 3; ++m) {
    const std::size_t d = std::size_t(1) << m;
    const TheoryDescriptor e(TheoryKind::Entanglement, {d, d});
    CHECK(delta_free_log_robustness(e, maximally_entangled(d).density(), 0.0) == doctest::Approx(double(m)));
  }
  CHECK_THROWS_AS(delta_free_robustness(coh2, diag({0.5, 0.5}), -0.1), Error);
}

TEST_CASE("closed forms") {
  CHECK(delta_robustness_maximally_coherent(2, 0.0) == kInf);
  CHECK(delta_robustness_maximally_coherent(4, 1.0) == doctest::Approx(2.0));
  CHECK(delta_robustness_maximally_coherent(4, 2.0) == 0.0);
  CHECK(delta_robustness_isotropic(2, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(delta_robustness_isotropic(4, 1.0, 1.0) == doctest::Approx(1.0));
  const auto f = isotropic_fidelity(maximally_entangled(3).density());
  REQUIRE(f);
  CHECK(*f == doctest::Approx(1.0));
  CHECK_FALSE(isotropic_fidelity(testing::psi82_ab().density()));
}

// R_g <= R^0 (the delta = 0 case) and R^delta <= R_free; R^delta is
// nonincreasing in delta.
TEST_CASE("robustness ordering and delta-monotonicity") {
  const double deltas[] = {0.0, 0.01, 0.1, 0.5, 1.0, 2.0};
  for (std::size_t d : {2, 4, 8}) {
    const TheoryDescriptor th(TheoryKind::Coherence, {d});
    const auto phi = maximally_coherent(d).density();
    const double rg = global_robustness(th, phi).value;
    const double rf = free_robustness(th, phi).value;
    CHECK(rg <= delta_free_robustness(th, phi, 0.0).value + 1e-6);
    double prev = kInf;
    for (double delta : deltas) {
      const double r = delta_free_robustness(th, phi, delta).value;
      CHECK(r <= rf);
      CHECK(r <= prev + 1e-9);
      prev = r;
    }
  }
  Rng rng(29);
  for (int t = 0; t < 20; ++t) {
    const TheoryDescriptor pur(TheoryKind::Purity, {3});
    const auto rho = random_mixed_state({3}, rng);
    double prev = kInf;
    for (double delta : deltas) {
      const double r = delta_free_robustness(pur, rho, delta).value;
      CHECK(r <= prev + 1e-6);
      prev = r;
    }
  }
}

TEST_CASE("convexity bound for purity") {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 3;
    const TheoryDescriptor pur(TheoryKind::Purity, {d});
    const auto rho = random_mixed_state({d}, rng);
    const auto gamma = DensityOperator::maximally_mixed({d});
    const double r = global_robustness(pur, rho).value;
    for (double s : {0.1, 1.0, 10.0})
      REQUIRE(global_robustness(pur, mix(rho, gamma, s)).value <= r / (1.0 + s) + 1e-9);
  }
}

TEST_CASE("sub-additivity and the tensor rule") {
  Rng rng(37);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_pure_state({2}, rng), b = random_pure_state({3}, rng);
    const TheoryDescriptor ca(TheoryKind::Coherence, {2}), cb(TheoryKind::Coherence, {3}),
        cab(TheoryKind::Coherence, {6});
    const auto ab = tensor(a, b);
    const WeightedPureState flat(ab.vector(), {6});
    const double la = global_log_robustness(ca, a.density()), lb = global_log_robustness(cb, b.density());
    const double lab = global_log_robustness(cab, flat.density());
    REQUIRE(lab <= la + lb + 1e-9);
    const double delta = std::max(la, lb);
    REQUIRE(is_delta_free(cab, flat.density(), 2.0 * delta, 1e-9));

    const auto p = random_mixed_state({2}, rng), q = random_mixed_state({3}, rng);
    const TheoryDescriptor pa(TheoryKind::Purity, {2}), pb(TheoryKind::Purity, {3}), pab(TheoryKind::Purity, {6});
    const DensityOperator pq(tensor(p, q).matrix(), {6});
    REQUIRE(global_log_robustness(pab, pq) <=
            global_log_robustness(pa, p) + global_log_robustness(pb, q) + 1e-9);
  }
}

TEST_CASE("purity delta robustness is finite with a valid certificate") {
  Rng rng(41);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 2 + t % 3;
    const TheoryDescriptor pur(TheoryKind::Purity, {d});
    const auto rho = random_mixed_state({d}, rng, 1 + t % d);
    for (double delta : {0.01, 0.1, 1.0}) {
      const auto r = delta_free_robustness(pur, rho, delta);
      REQUIRE(std::isfinite(r.value));
      if (r.mixing_state) REQUIRE(is_delta_free(pur, mix(rho, *r.mixing_state, r.value), delta, 1e-6));
    }
  }
}

TEST_CASE("coherence delta certificates") {
  for (std::size_t d : {2, 3, 4}) {
    const TheoryDescriptor th(TheoryKind::Coherence, {d});
    const auto phi = maximally_coherent(d).density();
    for (double delta : {0.1, 0.5}) {
      const auto r = delta_free_robustness(th, phi, delta);
      REQUIRE(r.mixing_state);
      CHECK(is_delta_free(th, mix(phi, *r.mixing_state, r.value), delta, 1e-6));
      CHECK(r.value == doctest::Approx(delta_robustness_maximally_coherent(d, delta)));
    }
  }
}
