#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigcompose {

// Base of every error raised by the library. Callers that only need to
// distinguish "bad input data" from "bad arguments" catch the subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an argument outside its contract (bad params, bad range).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data could not be parsed. line() is 1-based; 0 when not line-bound.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line),
        detail_(message) {}
  // Same error attributed to a file: "<source>:<line>: <message>".
  ParseError(const std::string& source, const ParseError& inner)
      : Error(source + ":" + (inner.line() ? std::to_string(inner.line()) + ": " : " ") + inner.detail()),
        line_(inner.line()),
        detail_(inner.detail()) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// An index file is malformed, truncated, or of an unsupported version.
class IndexFormatError : public Error {
 public:
  using Error::Error;
};

// The index was built from a different dataset than the one supplied.
class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace sigcompose
