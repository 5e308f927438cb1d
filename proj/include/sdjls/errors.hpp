#pragma once

#include <stdexcept>
#include <string>

namespace sdjls {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class InvalidProblemError : public Error {
 public:
  using Error::Error;
};

class MissingBlockError : public Error {
 public:
  using Error::Error;
};

class SingularXError : public Error {
 public:
  using Error::Error;
};

/// Synthesis requested on a model without inputs (input_dim == 0).
class NoInputError : public Error {
 public:
  using Error::Error;
};

/// next_mode called from a mode whose exit rate is zero.
class AbsorbingModeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdjls
