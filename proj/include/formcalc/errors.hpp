#pragma once

#include <stdexcept>
#include <string>

namespace formcalc {

enum class ErrorCode {
  InvalidArgument,
  BackendMismatch,
  Uncertified,
  NotDense,
  NotSymmetric,
  NotSelfAdjoint,
  Indefinite,
  NoLowerBound,
  Singular,
  NotInjective,
  OutOfDomain,
  NotCommuting,
  NotEqual,
  NotClosed,
  Unsupported,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library. Uncertified results are a distinct
/// code so callers can separate "mathematically false" from "could not decide".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  bool uncertified() const noexcept { return code_ == ErrorCode::Uncertified; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace formcalc
