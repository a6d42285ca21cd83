#pragma once

#include <stdexcept>
#include <string>

namespace lossmoe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied count, index or probability is outside its domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An object failed an internal consistency check (non-Hermitian input,
/// dimension mismatch, non-normalized state, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parameters are individually valid but jointly admit no answer, e.g. a
/// margin too small for the rounding-size formula.
class InfeasibleParameters : public Error {
 public:
  using Error::Error;
};

/// A query falls outside the range covered by sampled data.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace lossmoe
