#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rmdecon {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Inputs rejected before any computation: bad sizes, malformed configs, empty lists.
class ValidationError : public Error {
public:
  using Error::Error;
};

// A distribution parameter outside its domain (non-positive scale, weight outside [0,1]).
class ParameterDomainError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// An argument outside the domain of a numerical routine (empty grid, n too small).
class DomainError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_ = 0;
};

// A law with an atom has no Lebesgue density.
class NoDensityError : public Error {
public:
  using Error::Error;
};

// A coefficient sequence outside the candidate class (constant term != 1, broken Hermitian parity).
class ModelClassError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class UnsupportedInitializationError : public Error {
public:
  using Error::Error;
};

// Parameter formulas that collapse to an unusable value (m = 0).
class DegenerateParametersError : public Error {
public:
  using Error::Error;
};

// A quantity that must hold by construction did not (e.g. non-real inversion integral).
class InternalConsistencyError : public Error {
public:
  using Error::Error;
};

// Objective or iterate became NaN/Inf during a search.
class NumericalFailure : public Error {
public:
  NumericalFailure(const std::string& what, std::vector<double> iterate)
      : Error(what), iterate_(std::move(iterate)) {}
  const std::vector<double>& iterate() const noexcept { return iterate_; }

private:
  std::vector<double> iterate_;
};

// File system failure, reported with the offending path.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace rmdecon
