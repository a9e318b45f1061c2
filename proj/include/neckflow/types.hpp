#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace neckflow {

using Scalar = double;
using Array = Eigen::ArrayX<Scalar>;
using Index = Eigen::Index;

/// Invalid user-facing configuration (bad grid bounds, preset parameters,
/// malformed config files). Carries a message naming the offending key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A state that violates a structural precondition (rho <= 0, size mismatch).
class DegenerateStateError : public std::runtime_error {
public:
    explicit DegenerateStateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched sequence lengths, empty windows and similar caller mistakes.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unrecoverable numerical failure (non-finite state, vanishing time step).
class NumericsError : public std::runtime_error {
public:
    explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem failure while persisting or loading run artifacts.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace neckflow
