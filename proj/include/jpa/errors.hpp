#pragma once

#include <stdexcept>
#include <string>

namespace jpa {

// Invalid input: bad argument range, malformed configuration, unsupported
// option. The CLI maps this family to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Failure of a numerical procedure on otherwise valid input. The CLI maps
// this family to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// More than three sign changes of the response function.
class NumericalAnomaly : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Gain denominator vanished: the parametric oscillation threshold.
class PoleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double tau)
        : NumericalError(what), tau_(tau) {}
    double blowup_time() const noexcept { return tau_; }

private:
    double tau_;
};

class UnattainableError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class WindowError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace jpa
