#pragma once

#include <stdexcept>
#include <string>

namespace longmem {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid distribution/process/baseline parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input series is too short or otherwise unusable.
class InputError : public Error {
 public:
  using Error::Error;
};

// Rescaled-range curve or regression could not be formed.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Monte Carlo reduction failed (empty or failed cell).
class SummaryError : public Error {
 public:
  using Error::Error;
};

// Configuration file or series file is malformed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A numerical invariant that cannot fail in exact arithmetic was violated.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace longmem
