#pragma once

#include <stdexcept>
#include <string>

namespace hqml {

// Base of every error the library throws. The CLI maps the three families
// (configuration, data, numeric) onto exit codes 2, 3 and 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Bad argument value (zero shots, k out of range, ...).
struct ArgumentError : ConfigError {
  using ConfigError::ConfigError;
};

// Mismatched dimensions or qubit counts.
struct ShapeError : ConfigError {
  using ConfigError::ConfigError;
};

// Qubit or feature index out of range.
struct IndexError : ConfigError {
  using ConfigError::ConfigError;
};

struct DataError : Error {
  using Error::Error;
};

// Training problem with no solution worth computing (e.g. one class only).
struct DegenerateProblemError : DataError {
  using DataError::DataError;
};

// Singular systems, solver non-convergence, non-finite results.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace hqml
