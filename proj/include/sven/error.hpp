#pragma once

#include <stdexcept>
#include <string>

namespace sven {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters, incompatible shapes between configuration items,
/// or a request the chosen method cannot serve (e.g. natural gradient with
/// fewer conditions than parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, non-convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files (IDX, dataset containers, grid files).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sven
