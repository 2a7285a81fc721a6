#include "firecast/errors.hpp"

namespace firecast {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidCoordinate: return "invalid-coordinate";
    case ErrorKind::DegenerateDomain: return "degenerate-domain";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::ParameterRange: return "parameter-range";
    case ErrorKind::Size: return "size";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Data: return "data";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::DegenerateCovariate: return "degenerate-covariate";
    case ErrorKind::EmptyLikelihood: return "empty-likelihood";
    case ErrorKind::UnusableStart: return "unusable-start";
    case ErrorKind::InvalidThresholds: return "invalid-thresholds";
    case ErrorKind::InvalidCdf: return "invalid-cdf";
    case ErrorKind::TargetMismatch: return "target-mismatch";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace firecast
