#pragma once

#include <stdexcept>
#include <string>

namespace cavitypress {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its domain (bad index, missing
/// coordinates, zero-probability conditioning, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A conditioning event or cylinder has probability zero.
class ZeroProbabilityError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A state-count or enumeration budget was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity missed its requested tolerance.
class ToleranceError : public Error {
 public:
  using Error::Error;
};

/// Malformed model-spec input; carries the 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace cavitypress
