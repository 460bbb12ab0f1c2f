#pragma once

#include <stdexcept>
#include <string>

namespace nvqo {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Mismatched qubit counts / matrix sizes, or a size above the qubit cap.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A parameter outside its admissible domain (eta > 1, T2 > 2 T1, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Malformed or schema-invalid configuration / noise table.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A numerical invariant was violated (trace drift, negative populations, ...).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// The requested estimator/noise combination is not defined.
class UnsupportedError : public Error {
  public:
    using Error::Error;
};

}  // namespace nvqo
