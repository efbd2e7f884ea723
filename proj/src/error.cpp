#include "cpscoding/error.hpp"

namespace cpscoding {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotDetectable: return "NotDetectable";
    case ErrorKind::CovarianceNotPSD: return "CovarianceNotPSD";
    case ErrorKind::EigensolverFailure: return "EigensolverFailure";
    case ErrorKind::UnsupportedSpectrum: return "UnsupportedSpectrum";
    case ErrorKind::HorizonTooShort: return "HorizonTooShort";
    case ErrorKind::RiccatiNoConvergence: return "RiccatiNoConvergence";
    case ErrorKind::SingularQuadraticForm: return "SingularQuadraticForm";
    case ErrorKind::UnstableObserver: return "UnstableObserver";
    case ErrorKind::ScaleSearchFailed: return "ScaleSearchFailed";
    case ErrorKind::SingularCoding: return "SingularCoding";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::ZeroSubspace: return "ZeroSubspace";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::Exhausted: return "Exhausted";
    case ErrorKind::BaseNeverDetected: return "BaseNeverDetected";
    case ErrorKind::HorizonExhausted: return "HorizonExhausted";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::UnknownFigure: return "UnknownFigure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(message) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace cpscoding
