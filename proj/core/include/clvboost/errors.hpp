#pragma once

#include <stdexcept>
#include <string>

namespace clvboost {

/// Base class for all library errors. The subclasses map onto the CLI exit
/// codes: DataError -> 3, DimensionError -> 4, NumericalError -> 5.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid input data: unreadable files, non-numeric cells, zero-variance
/// columns, bad fold counts.
struct DataError : Error {
  using Error::Error;
};

/// Shape mismatch between a model/params object and the data it is applied to.
struct DimensionError : Error {
  using Error::Error;
};

/// Numerical failure: non-convergence, loss of positive definiteness,
/// degenerate groups or residuals.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace clvboost
