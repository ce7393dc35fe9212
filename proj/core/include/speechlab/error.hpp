#pragma once

#include <stdexcept>
#include <string>

namespace speechlab {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed container or file header.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input using an encoding we do not decode.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied argument violates a precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Not enough samples/segments/frames for a stable estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Text or JSON input failed to parse. `row` is 1-based when known, 0 otherwise.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t row = 0)
      : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Model file written by a newer format version.
class IncompatibleVersionError : public Error {
 public:
  using Error::Error;
};

// Metric has no defined value for the given input (e.g. AUC with one class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace speechlab
