#include "theories.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "random.hpp"

namespace rtd {

const char* to_string(TheoryKind kind) noexcept {
  switch (kind) {
    case TheoryKind::Coherence: return "coherence";
    case TheoryKind::Entanglement: return "entanglement";
    case TheoryKind::Purity: return "purity";
  }
  return "unknown";
}

TheoryKind parse_theory_kind(const std::string& name) {
  if (name == "coherence") return TheoryKind::Coherence;
  if (name == "entanglement" || name == "bipartite-entanglement") return TheoryKind::Entanglement;
  if (name == "purity") return TheoryKind::Purity;
  fail(ErrorCode::InvalidArgument, "unknown theory '" + name + "'");
}

TheoryDescriptor::TheoryDescriptor(TheoryKind kind, Dims dims) : kind_(kind), dims_(std::move(dims)) {
  if (dims_.empty() || product(dims_) == 0) fail(ErrorCode::InvalidArgument, "theory needs nonempty dims");
  switch (kind_) {
    case TheoryKind::Coherence:
      caps_ = {true, true, true, false};
      break;
    case TheoryKind::Purity:
      caps_ = {true, true, true, false};
      break;
    case TheoryKind::Entanglement:
      if (dims_.size() != 2) fail(ErrorCode::DimensionMismatch, "entanglement theory needs dims [dA, dB]");
      caps_ = {false, true, false, true};
      break;
  }
}

TheoryDescriptor theory_for(TheoryKind kind, const Dims& dims) { return TheoryDescriptor(kind, dims); }

namespace {

void require_dim(const TheoryDescriptor& theory, std::size_t d) {
  if (theory.dim() != d) fail(ErrorCode::DimensionMismatch, "state dimension does not match theory");
}

DensityOperator product_projector(const ComplexVector& a, const ComplexVector& b, const Dims& dims) {
  ComplexVector v(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) v.segment(i * b.size(), b.size()) = a(i) * b;
  v.normalize();
  return DensityOperator(v * v.adjoint(), dims);
}

// Radical inverse in base b: the Halton coordinate of index n.
double radical_inverse(std::uint64_t n, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) { prime = false; break; }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

}  // namespace

MembershipVerdict is_free(const TheoryDescriptor& theory, const DensityOperator& rho, double tol) {
  require_dim(theory, rho.dim());
  const auto& m = rho.matrix();
  MembershipVerdict v;
  switch (theory.kind()) {
    case TheoryKind::Coherence: {
      double worst = 0.0;
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          if (i != j) worst = std::max(worst, std::abs(m(i, j)));
      v.certificate = worst;
      v.member = worst <= tol;
      break;
    }
    case TheoryKind::Purity: {
      const auto d = m.rows();
      const double dist = (m - ComplexMatrix::Identity(d, d) / double(d)).norm();
      v.certificate = dist;
      v.member = dist <= tol;
      break;
    }
    case TheoryKind::Entanglement: {
      const double low = lambda_min(partial_transpose_b(m, theory.dims()));
      v.certificate = low;
      v.member = low >= -tol;
      v.relaxation = true;
      break;
    }
  }
  return v;
}

Overlap max_overlap(const TheoryDescriptor& theory, const DensityOperator& rho) {
  require_dim(theory, rho.dim());
  switch (theory.kind()) {
    case TheoryKind::Coherence: {
      const RealVector diag = rho.matrix().diagonal().real();
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < diag.size(); ++i)
        if (diag(i) > diag(best)) best = i;  // strict: ties keep the lowest index
      return {diag(best), DensityOperator::basis_projector(theory.dims(), static_cast<std::size_t>(best))};
    }
    case TheoryKind::Purity:
      return {1.0 / double(theory.dim()), DensityOperator::maximally_mixed(theory.dims())};
    case TheoryKind::Entanglement:
      if (!is_pure(rho, 1e-9))
        fail(ErrorCode::UnsupportedInput, "entanglement max_overlap requires a pure input");
      return max_overlap(theory, to_pure(rho));
  }
  fail(ErrorCode::Internal, "unreachable");
}

Overlap max_overlap(const TheoryDescriptor& theory, const WeightedPureState& psi) {
  require_dim(theory, psi.dim());
  switch (theory.kind()) {
    case TheoryKind::Coherence: {
      const RealVector p = psi.vector().cwiseAbs2();
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < p.size(); ++i)
        if (p(i) > p(best)) best = i;
      return {psi.weight() * p(best),
              DensityOperator::basis_projector(theory.dims(), static_cast<std::size_t>(best))};
    }
    case TheoryKind::Purity:
      return {psi.weight() / double(theory.dim()), DensityOperator::maximally_mixed(theory.dims())};
    case TheoryKind::Entanglement: {
      const WeightedPureState unit(psi.vector(), theory.dims());
      const Schmidt s = schmidt(unit);
      const double top = s.coefficients(0);
      return {psi.weight() * top * top, product_projector(s.left.col(0), s.right.col(0), theory.dims())};
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

std::vector<DensityOperator> extreme_free_states(const TheoryDescriptor& theory, std::size_t sample_size,
                                                 std::uint64_t seed) {
  std::vector<DensityOperator> out;
  switch (theory.kind()) {
    case TheoryKind::Coherence:
      for (std::size_t i = 0; i < theory.dim(); ++i) out.push_back(DensityOperator::basis_projector(theory.dims(), i));
      return out;
    case TheoryKind::Purity:
      out.push_back(DensityOperator::maximally_mixed(theory.dims()));
      return out;
    case TheoryKind::Entanglement: {
      const std::size_t da = theory.dims()[0], db = theory.dims()[1];
      const std::size_t coords = 2 * (da + db);  // one Box-Muller pair per complex amplitude
      const auto primes = first_primes(coords);
      Rng rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> shift(coords);
      for (auto& s : shift) s = u(rng);  // Cranley-Patterson rotation
      for (std::size_t n = 1; n <= sample_size; ++n) {
        std::vector<double> x(coords);
        for (std::size_t k = 0; k < coords; ++k) {
          x[k] = std::fmod(radical_inverse(n, primes[k]) + shift[k], 1.0);
          x[k] = std::clamp(x[k], 1e-12, 1.0 - 1e-12);
        }
        auto gaussian_pair = [&](std::size_t k) {
          const double r = std::sqrt(-2.0 * std::log(x[k]));
          const double phi = 2.0 * std::numbers::pi * x[k + 1];
          return cplx(r * std::cos(phi), r * std::sin(phi));
        };
        ComplexVector a(static_cast<Eigen::Index>(da)), b(static_cast<Eigen::Index>(db));
        for (std::size_t i = 0; i < da; ++i) a(static_cast<Eigen::Index>(i)) = gaussian_pair(2 * i);
        for (std::size_t j = 0; j < db; ++j) b(static_cast<Eigen::Index>(j)) = gaussian_pair(2 * (da + j));
        out.push_back(product_projector(a.normalized(), b.normalized(), theory.dims()));
      }
      return out;
    }
  }
  return out;
}

DensityOperator random_free_state(const TheoryDescriptor& theory, std::uint64_t seed) {
  Rng rng(seed);
  switch (theory.kind()) {
    case TheoryKind::Coherence: {
      const RealVector p = random_probability(theory.dim(), rng);
      ComplexMatrix m = p.cast<cplx>().asDiagonal();
      return DensityOperator(std::move(m), theory.dims());
    }
    case TheoryKind::Purity:
      return DensityOperator::maximally_mixed(theory.dims());
    case TheoryKind::Entanglement: {
      const std::size_t da = theory.dims()[0], db = theory.dims()[1];
      const RealVector p = random_probability(4, rng);
      ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(da * db), static_cast<Eigen::Index>(da * db));
      for (Eigen::Index k = 0; k < 4; ++k) {
        const auto a = random_unit_vector(da, rng);
        const auto b = random_unit_vector(db, rng);
        m += p(k) * product_projector(a, b, theory.dims()).matrix();
      }
      return DensityOperator(std::move(m), theory.dims());
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

WeightedPureState tensor_power(const TheoryDescriptor& theory, const WeightedPureState& phi, std::size_t m) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "tensor power needs m >= 1");
  WeightedPureState out = phi;
  for (std::size_t k = 1; k < m; ++k)
    out = theory.kind() == TheoryKind::Entanglement ? tensor_bipartite(out, phi) : tensor(out, phi);
  return out;
}

DensityOperator tensor_power(const TheoryDescriptor& theory, const DensityOperator& rho, std::size_t m) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "tensor power needs m >= 1");
  DensityOperator out = rho;
  for (std::size_t k = 1; k < m; ++k)
    out = theory.kind() == TheoryKind::Entanglement ? tensor_bipartite(out, rho) : tensor(out, rho);
  return out;
}

WeightedPureState unit_state(TheoryKind kind, std::size_t d) {
  switch (kind) {
    case TheoryKind::Coherence: return maximally_coherent(d);
    case TheoryKind::Entanglement: return maximally_entangled(d);
    case TheoryKind::Purity: {
      ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d));
      v(0) = 1.0;
      return WeightedPureState(std::move(v), {d});
    }
  }
  fail(ErrorCode::Internal, "unreachable");
}

}  // namespace rtd
