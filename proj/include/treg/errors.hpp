#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treg {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A square system is (numerically) singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// An iterate became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}

  // Iteration, epoch or layer index at which the blow-up was detected.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// An argument lies outside the domain of a function (e.g. log of a
// non-positive value).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A function was called on a kind that does not support it.
class MisuseError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data, CSV or model files.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace treg
