#pragma once

#include <stdexcept>
#include <string>

namespace wtw {

/// Invalid numeric argument to a statistics or model function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Bosonic condensation: a pair with y_i y_j >= 1 has unbounded expected weight.
class DivergenceError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed or inconsistent input data or configuration.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constraints that no finite set of parameters can satisfy.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wtw
