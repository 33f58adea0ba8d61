#pragma once

#include <stdexcept>
#include <string>

namespace winmart {

// Invalid caller-supplied parameters (ranges, sizes, malformed ids).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Function evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative or numerical routine failed (non-convergence, broken state).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Martingale transport problem without any feasible coupling.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Too few samples for a statistical test to be meaningful.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace winmart
