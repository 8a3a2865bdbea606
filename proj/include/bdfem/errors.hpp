#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bdfem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

struct UnsupportedDegreeError : Error {
  using Error::Error;
};

/// Dirac source on the boundary or outside the closed domain.
struct SourcePlacementError : Error {
  using Error::Error;
};

/// Weight evaluated exactly at its singular point with a negative exponent.
struct SingularEvaluationError : Error {
  using Error::Error;
};

/// Boundary data disagrees across segments meeting at a corner.
struct IncompatibleDataError : Error {
  using Error::Error;
};

struct SingularSystemError : Error {
  SingularSystemError(const std::string& msg, int pivot = -1)
      : Error(msg), pivot_index(pivot) {}
  int pivot_index;  // offending pivot/column when the factorization reports one
};

/// Fixed-point iteration exceeded its budget; carries the increment history.
struct PicardDivergenceError : Error {
  PicardDivergenceError(const std::string& msg, std::vector<double> history)
      : Error(msg), increments(std::move(history)) {}
  std::vector<double> increments;
};

struct FitError : Error {
  using Error::Error;
};

struct UsageError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace bdfem
