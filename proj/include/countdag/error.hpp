#pragma once

#include <stdexcept>
#include <string>

namespace countdag {

// Malformed or out-of-domain user data (negative counts, NaN objectives, bad files).
class InvalidData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fisher information that cannot be inverted even after the ridge rescue.
class SingularInformation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The simulator rejected too many rows because of count overflow.
class RowRejectionLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file could not be parsed. Carries a 1-based location when known.
class ParseError : public InvalidData {
 public:
  ParseError(const std::string& path, std::size_t line, std::size_t column, const std::string& what)
      : InvalidData(path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace countdag
