#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace firecast {

enum class ErrorKind {
  InvalidCoordinate,
  DegenerateDomain,
  OutOfDomain,
  NotPositiveDefinite,
  DimensionMismatch,
  ParameterRange,
  Size,
  Convergence,
  Data,
  Parse,
  Consistency,
  DegenerateCovariate,
  EmptyLikelihood,
  UnusableStart,
  InvalidThresholds,
  InvalidCdf,
  TargetMismatch,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the Cholesky factorization. `pivot()` is the index in the
/// original (unpermuted) ordering of the first rejected pivot.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::ptrdiff_t pivot, double value)
      : Error(ErrorKind::NotPositiveDefinite,
              "matrix is not positive definite: pivot " + std::to_string(pivot) +
                  " = " + std::to_string(value)),
        pivot_(pivot) {}

  std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

class OutOfDomain : public Error {
 public:
  explicit OutOfDomain(std::size_t index)
      : Error(ErrorKind::OutOfDomain,
              "location " + std::to_string(index) + " lies outside the mesh"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace firecast
