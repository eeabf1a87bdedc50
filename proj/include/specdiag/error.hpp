#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specdiag {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SolverTimeout : public Error {
 public:
  using Error::Error;
};

// A consistency check failed to produce a verdict. Carries the rendered
// check key so the failing constraint union can be identified.
class CheckFailed : public Error {
 public:
  CheckFailed(std::string key, const std::string& reason)
      : Error("consistency check failed for {" + key + "}: " + reason), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class InconsistentBackground : public Error {
 public:
  using Error::Error;
};

// Brute-force enumeration refused because the input is too large.
class GuardExceeded : public Error {
 public:
  using Error::Error;
};

class SamplingExhausted : public Error {
 public:
  SamplingExhausted(std::size_t attempts, std::size_t found, std::size_t wanted)
      : Error("found only " + std::to_string(found) + " of " + std::to_string(wanted) +
              " inconsistent requirement sets after " + std::to_string(attempts) + " attempts"),
        attempts_(attempts) {}

  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

}  // namespace specdiag
