#pragma once

#include <stdexcept>
#include <string>

namespace omlp {

/// Malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A standing-assumption or invariant check failed.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mathematically ill-posed request (non-integrable moment, bad kernel
/// parameters).
class DomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to converge or hit its iteration cap.
class SolverError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Simulated state left the sanity box.
class DivergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace omlp
