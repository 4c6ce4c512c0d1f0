#pragma once

#include <stdexcept>
#include <string>

namespace rtd {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Io,
  DimensionMismatch,
  NotHermitian,
  NotPSD,
  BadFactorIndex,
  UnsupportedInput,
  DeltaNegative,
  HypothesisNotMet,
  NotExact,
  Internal,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the distillation-map builder when the sufficient condition for
/// the measure-and-prepare construction fails. Both sides are kept so callers
/// can print the failed inequality.
class HypothesisNotMet : public Error {
 public:
  HypothesisNotMet(const std::string& what, double lhs, double rhs)
      : Error(ErrorCode::HypothesisNotMet, what), lhs_(lhs), rhs_(rhs) {}
  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  double lhs_;
  double rhs_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rtd
