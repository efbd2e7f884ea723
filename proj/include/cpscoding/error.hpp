#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpscoding {

enum class ErrorKind {
  DimensionMismatch,
  NotDetectable,
  CovarianceNotPSD,
  EigensolverFailure,
  UnsupportedSpectrum,
  HorizonTooShort,
  RiccatiNoConvergence,
  SingularQuadraticForm,
  UnstableObserver,
  ScaleSearchFailed,
  SingularCoding,
  ZeroVector,
  ZeroSubspace,
  IndexOutOfRange,
  DimensionTooSmall,
  Exhausted,
  BaseNeverDetected,
  HorizonExhausted,
  ConfigInvalid,
  UnknownFigure,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and tests)
// can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace cpscoding
