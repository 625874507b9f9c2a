#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crowdimpute {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Bad user configuration: schema, flags, missing input files. The CLI maps
/// these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-schema input data. Row and column are zero-based data
/// coordinates (the header line is not counted as a row).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : Error("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Numerical failure inside a model fit (rank deficiency, no residual df).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A referenced questionnaire, job or artifact does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// A simulated crowd could not produce k accepted judgments within the
/// re-solicitation cap.
class SolicitationCapError : public Error {
 public:
  using Error::Error;
};

}  // namespace crowdimpute
