#pragma once

// Seeded invariant suites behind the `verify` command. Every check compares
// two numbers against a tolerance derived from VerifyOptions::tol; a negative
// tol is treated as a faulty fixture and every check fails (negative control).

#include <cstdint>
#include <string>
#include <vector>

namespace rtd {

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t dim_max = 4;
  /// Base tolerance for exact identities. Oracle comparisons use their own
  /// documented tolerances scaled by tol / 1e-9.
  double tol = 1e-9;
  /// Random instances per (suite, dimension).
  std::size_t trials = 50;
};

struct VerifyFailure {
  std::string suite;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double tol = 0.0;
};

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::vector<VerifyFailure> failures;
  double seconds = 0.0;
};

struct VerifyReport {
  bool passed = true;
  std::vector<SuiteResult> suites;
};

const std::vector<std::string>& verify_suite_names();

/// `suite` is one of verify_suite_names() or "all".
VerifyReport run_verify(const std::string& suite, const VerifyOptions& opts);

}  // namespace rtd
