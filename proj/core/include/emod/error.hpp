#pragma once

#include <stdexcept>
#include <string>

namespace emod {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An error tied to a location in MiniJ source.
class SourceError : public Error {
 public:
  SourceError(const std::string& what, int line, int col)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + what),
        line_(line),
        col_(col) {}

  int line() const noexcept { return line_; }
  int col() const noexcept { return col_; }

 private:
  int line_;
  int col_;
};

class SyntaxError : public SourceError {
 public:
  using SourceError::SourceError;
};

class TypeError : public SourceError {
 public:
  using SourceError::SourceError;
};

class ResolveError : public SourceError {
 public:
  using SourceError::SourceError;
};

/// Raised by the interpreter when a type-checked program faults at run time.
/// Reaching this indicates an interpreter bug.
class RuntimeFault : public Error {
 public:
  using Error::Error;
};

class StepLimitExceeded : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace emod
