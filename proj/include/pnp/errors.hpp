#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

// Error taxonomy. Everything user-triggerable derives from Error so the CLI
// can map the family to an exit code without string matching.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad parameter values, malformed config files, inconsistent shapes declared
// up front. CLI exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Shape mismatch detected when two runtime objects meet.
class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Grid density support too narrow for the requested smoothing.
class SupportError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// I/O and wire-protocol failures (files, external denoiser endpoints).
// CLI exit code 2.
class TransportError : public Error {
public:
    using Error::Error;
};

// Numerical failures at runtime: non-finite chain state, degenerate
// likelihood mass, quadrature tail underflow. CLI exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace pnp
