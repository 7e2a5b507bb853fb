#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ordvi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate a precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset or configuration text. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A computation exceeded its configured budget (search nodes, enumeration size).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf, empty masks and similar numerical failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ordvi
