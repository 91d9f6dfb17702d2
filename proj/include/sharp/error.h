#pragma once

#include <stdexcept>
#include <string>

namespace sharp {

// Base of every error the library raises. Each subclass corresponds to one
// failure family so callers (notably the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point at or behind the camera plane (z <= 0).
class DegenerateDepthError : public Error {
 public:
  DegenerateDepthError(const std::string& what, int joint)
      : Error(what), joint_(joint) {}
  int joint() const { return joint_; }

 private:
  int joint_;
};

// Shape, size or dimension disagreement between arguments.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A scalar argument outside its admissible interval.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Semantically invalid data (bad labels, unknown tags, empty sets).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Text input that does not follow its schema. Line numbers are 1-based;
// 0 means "not line oriented".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Binary input with a bad magic, version or truncated payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced or consumed by a numeric kernel.
class NumericFault : public Error {
 public:
  using Error::Error;
};

class CheckpointIncompatible : public Error {
 public:
  using Error::Error;
};

// Two inputs that should describe the same data disagree (e.g. frame ids).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace sharp
