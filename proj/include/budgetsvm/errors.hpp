#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace budgetsvm {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed svmlight input. `line()` is 1-based; 0 means "whole input".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(line == 0 ? reason : "line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Sum of merge weights too close to zero for a weighted mean.
class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

class InsufficientSVs : public Error {
 public:
  using Error::Error;
};

class ZeroCoefficient : public Error {
 public:
  using Error::Error;
};

class InvalidFraction : public Error {
 public:
  using Error::Error;
};

class UnknownPreset : public Error {
 public:
  using Error::Error;
};

/// Malformed model or report file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace budgetsvm
