#pragma once

#include <stdexcept>
#include <string>

namespace bss {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unusable configuration (bad burn-in, empty gap range...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed: non-finite entries, empty files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Statistic undefined on the given data, e.g. a constant series.
class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

/// A numerical procedure failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved = 0.0)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Asymptotic theory does not apply for the requested (k, H) pair.
class RegimeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bss
