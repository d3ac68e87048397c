#pragma once

#include <stdexcept>
#include <string>

namespace dolinar {

/// Base class of everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: wrong shapes, out-of-range parameters, malformed records.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The two signals coincide (alpha = 0), so the measurement basis is undefined.
class DegenerateSignalError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical check failed: probability not conserved, quadrature diverged.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Fock-space cutoff too small for the amplitudes involved.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dolinar
