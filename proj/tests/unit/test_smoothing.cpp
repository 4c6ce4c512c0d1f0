#include <doctest.h>

#include "helpers.hpp"
#include "measures.hpp"
#include "oracles.hpp"
#include "random.hpp"

using namespace rtd;

namespace {
const TheoryDescriptor coh2(TheoryKind::Coherence, {2});

SmoothingBallSpec ball(double eps, BallKind kind = BallKind::Pure) {
  SmoothingBallSpec s;
  s.epsilon = eps;
  s.ball = kind;
  return s;
}
}  // namespace

TEST_CASE("epsilon = 0 collapses to g_min") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto psi = random_pure_state({3}, rng);
    const TheoryDescriptor th(TheoryKind::Coherence, {3});
    const auto r = g_min_smoothed(th, psi.density(), ball(0.0));
    CHECK(r.value == g_min(th, psi.density()));
    CHECK(r.exact);
    REQUIRE(r.pure_argmax);
    CHECK(std::abs(std::abs(r.pure_argmax->vector().dot(psi.vector())) - 1.0) < 1e-12);
  }
}

// Reference values from an independent dense scan over (angle, weight).
TEST_CASE("frozen smoothed values") {
  const auto psi = testing::psi82().density();
  CHECK(g_min_smoothed(coh2, psi, ball(0.01)).value == doctest::Approx(0.5641908248106182).epsilon(1e-7));
  CHECK(g_min_smoothed(coh2, psi, ball(0.05)).value == doctest::Approx(0.9879603728802857).epsilon(1e-7));
  CHECK(g_min_smoothed(coh2, psi, ball(0.1)).value == doctest::Approx(1.1520030934450496).epsilon(1e-7));

  const auto phi = maximally_coherent(2).density();
  for (double eps : {0.01, 0.05, 0.1}) {
    const auto r = g_min_smoothed(coh2, phi, ball(eps));
    CHECK(r.value == doctest::Approx(1.0 - 2.0 * std::log2(1.0 - eps)));
    CHECK(r.value >= 1.0);
  }
}

TEST_CASE("pure ball agrees with the grid at resolution 400") {
  const auto psi = testing::psi82().density();
  for (double eps : {0.01, 0.05, 0.1}) {
    const double v = g_min_smoothed(coh2, psi, ball(eps)).value;
    CHECK(std::abs(v - grid_smoothed_g_min(coh2, psi, eps, BallKind::Pure, 400)) <= 1e-3);
    CHECK(v >= -std::log2(0.8));
  }
}

TEST_CASE("argmax lies in the ball") {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 2 + t % 3;
    const TheoryDescriptor th(t % 2 ? TheoryKind::Coherence : TheoryKind::Purity, {d});
    const auto rho = random_pure_state({d}, rng).density();
    const double eps = 0.02 * (1 + t % 5);
    const auto r = g_min_smoothed(th, rho, ball(eps));
    REQUIRE(r.argmax_fidelity >= 1.0 - eps - 1e-9);
    REQUIRE(r.value >= g_min(th, rho) - 1e-12);
    REQUIRE(r.pure_argmax);
    REQUIRE(r.pure_argmax->weight() <= 1.0 + 1e-12);
  }
}

TEST_CASE("general ball on mixed inputs is a labeled lower estimate") {
  Rng rng(6);
  const TheoryDescriptor th(TheoryKind::Coherence, {2});
  for (int t = 0; t < 10; ++t) {
    const auto rho = random_mixed_state({2}, rng);
    auto spec = ball(0.05, BallKind::General);
    spec.seed = 9;
    const auto r = g_min_smoothed(th, rho, spec);
    CHECK_FALSE(r.exact);
    CHECK(r.argmax_fidelity >= 0.95 - 1e-9);
    CHECK(r.value >= g_min(th, rho) - 1e-12);
    const double grid = grid_smoothed_g_min(th, rho, 0.05, BallKind::General, 60);
    CHECK(r.value >= grid - 1e-3);
  }
}

TEST_CASE("empty pure ball gives 0 and bad epsilon is rejected") {
  Rng rng(8);
  const auto rho = random_mixed_state({2}, rng, 2);
  // Highly mixed states have no pure state within a tiny fidelity ball.
  const auto mixed = DensityOperator::maximally_mixed({2});
  const auto r = g_min_smoothed(coh2, mixed, ball(0.01));
  CHECK(r.value == 0.0);
  CHECK_THROWS_AS(g_min_smoothed(coh2, rho, ball(-0.1)), Error);
  CHECK_THROWS_AS(g_min_smoothed(coh2, rho, ball(1.5)), Error);
}
