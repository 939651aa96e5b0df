#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace itreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

/// The operator kind cannot provide what was asked (e.g. rows of a matrix-free map).
struct UnsupportedOperation : Error {
  using Error::Error;
};

/// Zero row/column where a nonzero one is required.
struct DegenerateOperator : Error {
  using Error::Error;
};

/// Step size or preconditioner outside the admissible range.
struct InvalidStep : Error {
  using Error::Error;
};

struct FormatError : Error {
  using Error::Error;
};

inline void require_size(Index got, Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace itreg
