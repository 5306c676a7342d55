#pragma once

#include <stdexcept>
#include <string>

namespace factorscope {

// Base of all library errors. Two branches matter to callers: InputError
// (bad files, bad dimensions, bad configuration -> CLI exit 2) and
// NumericFailure (estimation broke down -> CLI exit 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : Error {
  using Error::Error;
};

struct NumericFailure : Error {
  using Error::Error;
};

// CSV/JSON ingestion problems; carries 1-based file coordinates where known
// (col == 0 means "whole row").
struct ParseError : InputError {
  ParseError(const std::string& what, long row, long col = 0)
      : InputError(what), row(row), col(col) {}
  long row;
  long col;
};

// Shape violations: too few rows, mismatched matrix sizes, r out of range...
struct DimensionError : InputError {
  using InputError::InputError;
};

// Lag k (or k0) outside the range the sample size supports.
struct LagError : InputError {
  using InputError::InputError;
};

// Bad coordinate partition for the grouped noise model.
struct PartitionError : InputError {
  using InputError::InputError;
};

// Invalid run configuration (CLI or simulation designs).
struct ConfigError : InputError {
  using InputError::InputError;
};

// Iterative eigensolver failed to converge.
struct EigensolverError : NumericFailure {
  using NumericFailure::NumericFailure;
};

// Spectrum unusable for the requested operation (all eigenvalues <= 0, ...).
struct DegenerateSpectrumError : NumericFailure {
  using NumericFailure::NumericFailure;
};

// Factor series degenerate (zero denominator in a strength ratio, ...).
struct DegenerateFactorError : NumericFailure {
  using NumericFailure::NumericFailure;
};

// Matrix too ill-conditioned to invert within the supported range.
struct ConditioningError : NumericFailure {
  using NumericFailure::NumericFailure;
};

// Nonpositive noise variances where positive ones are required.
struct NoiseModelError : NumericFailure {
  using NumericFailure::NumericFailure;
};

}  // namespace factorscope
