#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter set violates its documented invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain where a formula is defined (e.g. R > 0.5 for D).
class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A ratio statistic has a vanishing denominator.
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

/// The choice event is not space-like separated from photon entry, or the
/// geometry is internally inconsistent.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class FitDegenerateError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based; 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dcsim
