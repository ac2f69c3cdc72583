#pragma once

#include <stdexcept>
#include <string>

namespace sis {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSize : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// A problem exceeds a configured computational cap (state count, dense solver
// dimension, matrix fill).
class SizeError : public Error {
 public:
  using Error::Error;
};

class NoCertificate : public Error {
 public:
  using Error::Error;
};

class Inapplicable : public Error {
 public:
  using Error::Error;
};

class DegenerateWindow : public Error {
 public:
  using Error::Error;
};

class PropagationInvalid : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Numerical state that can only arise from a bug, e.g. a probability below
// the rounding threshold.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace sis
