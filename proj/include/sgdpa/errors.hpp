#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgdpa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: inconsistent dimensions, out-of-range indices, invalid
/// parameters or malformed instances. Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A matrix that should be symmetric PSD is not.
class InvalidInstanceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A function precondition on its scalar arguments was violated
/// (for example a negative multiplier).
class ContractError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The iteration produced a non-finite primal or dual value.
class DivergedError : public Error {
 public:
  DivergedError(std::uint64_t iteration, const std::string& what)
      : Error("diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// File could not be read or written. Maps to CLI exit code 4.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgdpa
