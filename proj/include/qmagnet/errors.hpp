#pragma once

#include <stdexcept>
#include <string>

namespace qmagnet {

// Bad user input: config files, CLI values, physics ranges.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Failure of a numerical procedure at runtime (truncation overflow,
// non-convergent fit, non-Hermitian Hamiltonian sample).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class FockTruncationError : public NumericalError {
public:
    explicit FockTruncationError(const std::string& what) : NumericalError(what) {}
};

class FitConvergenceError : public NumericalError {
public:
    explicit FitConvergenceError(const std::string& what) : NumericalError(what) {}
};

}  // namespace qmagnet
