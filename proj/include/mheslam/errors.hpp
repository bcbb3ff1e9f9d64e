#pragma once

#include <stdexcept>
#include <string>

namespace mheslam {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Landmark and sensor origin coincide; bearing direction undefined.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class InvalidParam : public Error {
public:
    using Error::Error;
};

/// Non-finite residual or Jacobian encountered by the solver.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Information matrix is rank deficient; no estimate available yet.
class SingularInformation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mheslam
