#pragma once

#include <stdexcept>
#include <string>

namespace gfmlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain of a formula or type invariant.
class ParameterDomainError : public Error {
public:
    using Error::Error;
};

/// Invalid scenario, configuration file or simulation setting.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Base of the numeric failures (mapped to CLI exit code 2).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Newton iteration could not locate a steady-state point.
class NoEquilibrium : public NumericError {
public:
    using NumericError::NumericError;
};

/// Linearization requested away from an equilibrium.
class NotAnEquilibrium : public NumericError {
public:
    using NumericError::NumericError;
};

/// Eigen-solver or root-finder did not converge.
class NumericFailure : public NumericError {
public:
    using NumericError::NumericError;
};

/// Division by a POC voltage magnitude that is too small.
class DegenerateVoltage : public NumericError {
public:
    using NumericError::NumericError;
};

/// A controller state vector does not match the configured variant.
class VariantMismatch : public Error {
public:
    using Error::Error;
};

/// Signal window too short (or channel missing) for the requested analysis.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Ringdown fit found no mode carrying a meaningful share of the energy.
class NoDominantMode : public Error {
public:
    using Error::Error;
};

}  // namespace gfmlab
