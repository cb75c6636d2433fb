#pragma once

#include <stdexcept>
#include <string>

namespace actsched {

// Base of every error raised by the library. The CLI maps subclasses onto
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instance, trace or configuration (CLI exit code 2).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Instance or trace file could not be parsed. `where()` names the offending
// line or field.
class FormatError : public InvalidInput {
 public:
  FormatError(const std::string& where, const std::string& what)
      : InvalidInput(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Pre-processing discarded every machine: the current estimate of the
// offline optimum is too small.
class GuessTooSmall : public Error {
 public:
  using Error::Error;
};

// A fractional step made no progress on coverage.
class StalledStep : public Error {
 public:
  using Error::Error;
};

// Per-job step budget of the fractional engine exhausted.
class StepCapExceeded : public Error {
 public:
  using Error::Error;
};

// Guess-and-double gave up: the guess exceeded the total machine cost.
class DoublingAborted : public Error {
 public:
  using Error::Error;
};

// Offline oracle could not produce an optimum (CLI exit code 4).
class OracleError : public Error {
 public:
  using Error::Error;
};

class InfeasibleInstance : public OracleError {
 public:
  using OracleError::OracleError;
};

class InstanceTooLarge : public OracleError {
 public:
  using OracleError::OracleError;
};

}  // namespace actsched
