#include "state_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rtd {

namespace {

using nlohmann::json;

cplx parse_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorCode::Parse, "complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

json write_complex(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

StateData make_state(const WeightedPureState& psi) { return {psi.dims(), psi, psi.density()}; }

StateData make_state(const DensityOperator& rho) { return {rho.dims(), std::nullopt, rho}; }

StateData parse_state(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("state file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Parse, "state file must hold a JSON object");
  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty())
    fail(ErrorCode::Parse, "state file needs a nonempty \"dims\" array");
  Dims dims;
  for (const auto& d : j["dims"]) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) fail(ErrorCode::Parse, "dims must be positive integers");
    dims.push_back(d.get<std::size_t>());
  }
  const std::size_t n = product(dims);
  if (!j.contains("kind") || !j["kind"].is_string()) fail(ErrorCode::Parse, "state file needs \"kind\"");
  const auto kind = j["kind"].get<std::string>();

  if (kind == "pure") {
    if (!j.contains("vector") || !j["vector"].is_array()) fail(ErrorCode::Parse, "pure state needs \"vector\"");
    const auto& v = j["vector"];
    if (v.size() != n) fail(ErrorCode::Parse, "vector length does not match dims");
    ComplexVector vec(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) vec(static_cast<Eigen::Index>(i)) = parse_complex(v[i]);
    const double norm = vec.norm();
    if (!(norm > 0) || !std::isfinite(norm)) fail(ErrorCode::Parse, "vector must be nonzero and finite");
    if (std::abs(norm - 1.0) > 1e-12) vec /= norm;
    double weight = 1.0;
    if (j.contains("weight")) {
      if (!j["weight"].is_number()) fail(ErrorCode::Parse, "weight must be a number");
      weight = j["weight"].get<double>();
    }
    WeightedPureState psi(std::move(vec), dims, weight);
    auto rho = psi.density();
    return {dims, std::move(psi), std::move(rho)};
  }
  if (kind == "mixed") {
    if (!j.contains("matrix") || !j["matrix"].is_array()) fail(ErrorCode::Parse, "mixed state needs \"matrix\"");
    const auto& rows = j["matrix"];
    if (rows.size() != n) fail(ErrorCode::Parse, "matrix size does not match dims");
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      if (!rows[r].is_array() || rows[r].size() != n) fail(ErrorCode::Parse, "matrix rows must have length prod(dims)");
      for (std::size_t c = 0; c < n; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_complex(rows[r][c]);
    }
    return {dims, std::nullopt, DensityOperator(std::move(m), dims)};
  }
  fail(ErrorCode::Parse, "kind must be \"pure\" or \"mixed\"");
}

StateData load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open state file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_state(ss.str());
}

std::string serialize_state(const WeightedPureState& psi) {
  json j;
  j["dims"] = psi.dims();
  j["kind"] = "pure";
  json v = json::array();
  for (Eigen::Index i = 0; i < psi.vector().size(); ++i) v.push_back(write_complex(psi.vector()(i)));
  j["vector"] = std::move(v);
  if (psi.weight() != 1.0) j["weight"] = psi.weight();
  return j.dump() + "\n";
}

std::string serialize_state(const DensityOperator& rho) {
  json j;
  j["dims"] = rho.dims();
  j["kind"] = "mixed";
  json rows = json::array();
  for (Eigen::Index r = 0; r < rho.matrix().rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < rho.matrix().cols(); ++c) row.push_back(write_complex(rho.matrix()(r, c)));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j.dump() + "\n";
}

std::string serialize_state(const StateData& state) {
  return state.pure ? serialize_state(*state.pure) : serialize_state(state.density);
}

}  // namespace rtd
