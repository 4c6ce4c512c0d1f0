#include <doctest.h>

#include "errors.hpp"
#include "helpers.hpp"
#include "random.hpp"
#include "state_io.hpp"

using namespace rtd;

namespace {
ErrorCode code_of(const std::string& text) {
  try {
    parse_state(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}
}  // namespace

TEST_CASE("round trip is bit-identical") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Dims dims = t % 2 ? Dims{2, 3} : Dims{4};
    const auto psi = random_pure_state(dims, rng);
    const auto back = parse_state(serialize_state(psi));
    REQUIRE(back.pure);
    REQUIRE(back.dims == dims);
    REQUIRE((back.pure->vector() - psi.vector()).cwiseAbs().maxCoeff() == 0.0);

    const auto rho = random_mixed_state(dims, rng);
    const auto again = parse_state(serialize_state(rho));
    REQUIRE_FALSE(again.pure);
    REQUIRE((again.density.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(serialize_state(again) == serialize_state(rho));
  }
}

TEST_CASE("parsing examples") {
  const auto s = parse_state(R"({"dims":[2],"kind":"pure","vector":[[1,0],[1,0]]})");
  REQUIRE(s.pure);
  CHECK(s.pure->vector()(0).real() == doctest::Approx(std::sqrt(0.5)));
  const auto w = parse_state(R"({"dims":[2],"kind":"pure","vector":[[1,0],[0,0]],"weight":0.5})");
  CHECK(w.pure->weight() == 0.5);
  const auto m = parse_state(R"({"dims":[2],"kind":"mixed","matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]})");
  CHECK(m.density.matrix()(1, 1).real() == 0.5);
}

TEST_CASE("malformed input") {
  CHECK(code_of("{") == ErrorCode::Parse);
  CHECK(code_of(R"({"dims":[2],"kind":"pure"})") == ErrorCode::Parse);
  CHECK(code_of(R"({"dims":[2],"kind":"other","vector":[[1,0],[0,0]]})") == ErrorCode::Parse);
  CHECK(code_of(R"({"dims":[3],"kind":"pure","vector":[[1,0],[0,0]]})") != ErrorCode::Internal);
  CHECK(code_of(R"({"dims":[2],"kind":"mixed","matrix":[[[0.5,0],[0.3,0]],[[0,0],[0.5,0]]]})") ==
        ErrorCode::NotHermitian);
  CHECK_THROWS_AS(load_state("/nonexistent/state.json"), Error);
}
