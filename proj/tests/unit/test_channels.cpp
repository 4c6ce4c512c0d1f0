#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "channels.hpp"
#include "helpers.hpp"
#include "random.hpp"

using namespace rtd;
using testing::diag;

namespace {

double overlap(const WeightedPureState& phi, const DensityOperator& rho) {
  return (phi.vector().adjoint() * rho.matrix() * phi.vector())(0, 0).real();
}

// |phi><i| for every basis state: prepares phi whatever the input.
Channel prepare_channel(const WeightedPureState& phi) {
  const auto d = static_cast<Eigen::Index>(phi.dim());
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index i = 0; i < d; ++i) {
    ComplexMatrix k = ComplexMatrix::Zero(d, d);
    k.col(i) = phi.vector();
    ops.push_back(k);
  }
  return Channel::kraus(ops, phi.dims(), phi.dims());
}

void check_valid_output(const DensityOperator& out) {
  REQUIRE(std::abs(out.matrix().trace().real() - 1.0) <= 1e-9);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(out.matrix(), Eigen::EigenvaluesOnly);
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-8);
}

}  // namespace

TEST_CASE("apply examples") {
  const auto rho = diag({0.3, 0.2, 0.5});
  CHECK((apply(Channel::dephasing({3}), rho).matrix() - rho.matrix()).norm() == 0.0);

  const auto psi = testing::psi82();
  const auto mp = Channel::measure_prepare(psi.density().matrix(), maximally_coherent(2),
                                           DensityOperator::maximally_mixed({2}), {2});
  const auto out = apply(mp, psi.density());
  CHECK(overlap(maximally_coherent(2), out) == doctest::Approx(1.0));

  for (std::size_t m = 1; m <= 3; ++m) {
    const auto phi = maximally_coherent(std::size_t(1) << m);
    const auto t = apply(Channel::twirl(phi.dims()), phi.density());
    CHECK((t.matrix() - phi.density().matrix()).norm() < 1e-12);
  }
  CHECK_THROWS_AS(apply(Channel::dephasing({2}), rho), Error);
}

TEST_CASE("twirl") {
  const auto t = twirl(diag({0.7, 0.2, 0.1}));
  CHECK((t.matrix() - DensityOperator::maximally_mixed({3}).matrix()).norm() < 1e-14);

  Rng rng(1);
  for (std::size_t d : {3, 5, 10}) {
    const auto rho = random_mixed_state({d}, rng);
    const auto once = twirl(rho);
    CHECK((twirl(once).matrix() - once.matrix()).norm() < 1e-12);
    CHECK(once.matrix().trace().real() == doctest::Approx(1.0));
    const auto phi = maximally_coherent(d);
    CHECK(overlap(phi, once) == doctest::Approx(overlap(phi, rho)));
    const auto n = static_cast<Eigen::Index>(d);
    const cplx off = once.matrix()(0, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) CHECK(once.matrix()(i, i).real() == doctest::Approx(1.0 / double(d)));
        else CHECK(std::abs(once.matrix()(i, j) - off) < 1e-12);
      }
  }
}

TEST_CASE("every channel variant is trace preserving and positive") {
  Rng rng(2);
  const auto phi = maximally_coherent(3);
  const auto eff = random_pure_state({3}, rng);
  const Channel channels[] = {
      Channel::dephasing({3}), Channel::twirl({3}), prepare_channel(phi),
      Channel::measure_prepare(0.7 * eff.density().matrix(), phi, DensityOperator::maximally_mixed({3}), {3})};
  for (const auto& ch : channels)
    for (int t = 0; t < 250; ++t) check_valid_output(apply(ch, random_mixed_state({3}, rng)));
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2) * 0.5;
  CHECK_THROWS_AS(Channel::kraus({bad}, {2}, {2}), Error);
}

TEST_CASE("certify_delta_rg examples") {
  const auto deph = certify_delta_rg(Channel::dephasing({3}), TheoryKind::Coherence, 0.0);
  CHECK(deph.verdict);
  CHECK(deph.exhaustive);
  CHECK(deph.max_output_lr == doctest::Approx(0.0));

  // Identity maps F^delta onto itself, so it is delta-RG; a channel that
  // prepares a resource state is not.
  const auto prep = certify_delta_rg(prepare_channel(maximally_coherent(2)), TheoryKind::Coherence, 0.0);
  CHECK_FALSE(prep.verdict);
  CHECK(prep.max_output_lr == doctest::Approx(1.0));
  CHECK(prep.checked_points.size() == 2);
  CHECK(certify_delta_rg(prepare_channel(maximally_coherent(2)), TheoryKind::Coherence, 1.0).verdict);

  const Channel id = Channel::kraus({ComplexMatrix::Identity(2, 2)}, {2}, {2});
  CHECK(certify_delta_rg(id, TheoryKind::Coherence, 0.0).verdict);
  CertifyOptions opts;
  opts.delta_free_samples = 20;
  const auto sampled = certify_delta_rg(id, TheoryKind::Coherence, 0.5, opts);
  CHECK(sampled.verdict);
  CHECK_FALSE(sampled.exhaustive);
  CHECK(sampled.max_output_lr <= 0.5 + 1e-9);
}

TEST_CASE("distillation map: coherence") {
  const auto phi = maximally_coherent(2);
  const auto rho = maximally_coherent(4).density();
  const TheoryDescriptor th(TheoryKind::Coherence, {4});
  CHECK_THROWS_AS(build_distillation_map(th, rho, phi, 2, 0.0, 0.0), HypothesisNotMet);

  DistillationOptions opts;
  opts.allow_unverified = true;
  const auto map = build_distillation_map(th, rho, phi, 2, 0.0, 0.0, opts);
  CHECK_FALSE(map.hypothesis_met);
  CHECK(map.fidelity_sq == doctest::Approx(1.0));
  CHECK(map.lhs == doctest::Approx(2.0));

  // With delta = 2 the requirement for m = 2 vanishes.
  const auto ok = build_distillation_map(th, rho, phi, 2, 2.0, 0.0);
  CHECK(ok.hypothesis_met);
  const auto cert = certify_delta_rg(ok.channel, TheoryKind::Coherence, 2.0);
  CHECK(cert.verdict);
}

TEST_CASE("distillation map: perfect entanglement concentration") {
  const auto psi = testing::flat_schmidt(4);
  const TheoryDescriptor th(TheoryKind::Entanglement, {4, 4});
  const auto map = build_distillation_map(th, psi.density(), maximally_entangled(2), 2, 0.0, 0.0);
  CHECK(map.hypothesis_met);
  CHECK(map.fidelity_sq == doctest::Approx(1.0));
  CHECK(map.lhs == doctest::Approx(2.0));
  CHECK(map.rhs == doctest::Approx(2.0));

  CertifyOptions opts;
  opts.sample_size = 200;
  opts.seed = 3;
  const auto cert = certify_delta_rg(map.channel, TheoryKind::Entanglement, 0.0, opts);
  CHECK(cert.verdict);
  for (const auto& p : cert.checked_points)
    if (p.target_overlap) REQUIRE(*p.target_overlap <= 0.25 + 1e-9);

  CHECK_THROWS_AS(build_distillation_map(th, psi.density(), maximally_entangled(2), 3, 0.0, 0.0), HypothesisNotMet);
  try {
    build_distillation_map(th, psi.density(), maximally_entangled(2), 3, 0.0, 0.0);
  } catch (const HypothesisNotMet& e) {
    CHECK(e.lhs() < e.rhs());
  }
}

TEST_CASE("fidelity guarantee holds on every build") {
  Rng rng(4);
  DistillationOptions opts;
  opts.allow_unverified = true;
  for (int t = 0; t < 40; ++t) {
    const std::size_t d = 2 + t % 3;
    const TheoryDescriptor th(t % 2 ? TheoryKind::Coherence : TheoryKind::Purity, {d});
    const auto rho = random_pure_state({d}, rng).density();
    const double eps = 0.02 * (t % 6);
    const auto map = build_distillation_map(th, rho, unit_state(th.kind(), 2), 1, 1.0, eps, opts);
    REQUIRE(map.fidelity_guarantee);
    REQUIRE(map.fidelity_sq >= 1.0 - 2.0 * eps - 1e-9);
    REQUIRE(map.effect_overlap >= 1.0 - 2.0 * eps - 1e-9);
  }
  CHECK(effect_epsilon(0.1) == doctest::Approx(1.0 - std::sqrt(0.8)));
  CHECK(effect_epsilon(0.0) == 0.0);
}

TEST_CASE("verify_extensivity") {
  for (std::size_t m = 1; m <= 4; ++m)
    CHECK(verify_extensivity(TheoryKind::Coherence, maximally_coherent(2), m, 1.0).passed);
  for (std::size_t m = 1; m <= 3; ++m)
    CHECK(verify_extensivity(TheoryKind::Entanglement, maximally_entangled(2), m, 1.0, 200, 5).passed);
  const auto bad = verify_extensivity(TheoryKind::Coherence, maximally_coherent(2), 2, 1.1);
  CHECK_FALSE(bad.passed);
  CHECK(bad.violations > 0);
  CHECK(bad.worst_ratio == doctest::Approx(std::exp2(0.2)));
}

TEST_CASE("gentle measurement") {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 2 + t % 4;
    const auto rho = random_mixed_state({d}, rng);
    const auto e = herm_eig(rho.matrix());
    const auto k = static_cast<Eigen::Index>(1 + t % d);
    const ComplexMatrix q = e.vectors.leftCols(k) * e.vectors.leftCols(k).adjoint();
    const auto g = gentle_measurement(rho, q);
    const double eps = std::max(0.0, (1.0 - g.success) / 2.0);
    REQUIRE(g.disturbance <= 2.0 * std::sqrt(2.0 * eps) + 1e-9);
  }
}

TEST_CASE("target requirement") {
  const auto phi = maximally_coherent(2);
  const auto direct = target_requirement(TheoryKind::Coherence, phi, 2, 1.0);
  CHECK(direct.condition == "direct");
  CHECK(direct.value == doctest::Approx(std::log2(3.0)));
  CHECK(target_requirement(TheoryKind::Coherence, phi, 1, 0.0).value == kInf);
  CHECK(target_requirement(TheoryKind::Entanglement, maximally_entangled(2), 2, 0.0).value == doctest::Approx(2.0));
  const auto single = target_requirement(TheoryKind::Coherence, testing::psi82(), 2, 1.0);
  CHECK(single.condition == "single_copy");
  CHECK(is_maximally_resourceful(TheoryKind::Entanglement, testing::flat_schmidt(3)));
  CHECK_FALSE(is_maximally_resourceful(TheoryKind::Entanglement, testing::psi82_ab()));
}
