#pragma once

#include <stdexcept>
#include <string>

namespace riskalloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or portfolio parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the domain of the operation (t <= 0, q >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The tail {S > s_q} is empty, e.g. for a constant aggregate loss.
///
/// Carries the conventional value (s_q) that callers may substitute when
/// they opt into the degenerate-tail fallback.
class DegenerateTailError : public Error {
 public:
  DegenerateTailError(const std::string& what, double convention_value)
      : Error(what), convention_value_(convention_value) {}

  double convention_value() const noexcept { return convention_value_; }

 private:
  double convention_value_;
};

/// Importance weights cannot be normalized (all-zero column, zero denominator).
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

/// No closed form is implemented for this family.
class UnsupportedFamilyError : public Error {
 public:
  using Error::Error;
};

/// A numeric quantity underflowed or became non-finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Too many Monte Carlo batches failed to produce a statistic.
class AggregationError : public Error {
 public:
  using Error::Error;
};

/// A configuration document is malformed. field() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace riskalloc
