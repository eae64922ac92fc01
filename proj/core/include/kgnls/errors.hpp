#pragma once

#include <stdexcept>
#include <string>

namespace kgnls {

// Precondition on a scalar parameter violated (c <= 0, h <= 0, N < 3, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Truncations or array lengths disagree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Monomial or sample counts exceed the configured budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structure the algorithm cannot handle (e.g. inhomogeneous Hamiltonian in a bound).
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numeric guard tripped: divisor below its floor, flow escape, singular Newton matrix.
class AnomalyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The parameter cascade stopped contracting.
class DivergenceError : public AnomalyError {
public:
    using AnomalyError::AnomalyError;
};

}  // namespace kgnls
