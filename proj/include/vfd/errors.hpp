#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vfd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (count, size, range) was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A cloud file or text held no points.
class EmptyCloud : public Error {
public:
  using Error::Error;
};

/// Geometry too degenerate for the requested computation
/// (coincident points, zero extent, zero-degree graph node).
class DegenerateGeometry : public Error {
public:
  using Error::Error;
};

/// Manifest references the same (label, pair-id) twice.
class DuplicatePair : public Error {
public:
  using Error::Error;
};

/// Model file written by an incompatible format version.
class UnsupportedVersion : public Error {
public:
  using Error::Error;
};

}  // namespace vfd
