#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace towarx {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside the operation's domain.
class InputError : public Error {
public:
  using Error::Error;
};

/// The data is unusable for the requested operation (gaps, empty segments,
/// malformed files).
class DataError : public Error {
public:
  using Error::Error;
};

class ParseError : public DataError {
public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// No row of the requested segment survives filtering.
class EmptySegmentError : public DataError {
public:
  using DataError::DataError;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace towarx
