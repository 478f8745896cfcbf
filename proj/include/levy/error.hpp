#pragma once

#include <stdexcept>
#include <string>

namespace levy {

// Invalid input or configuration. The CLI maps it to exit status 1.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure: under-resolved lattices, divergent integrals, quadrature breakdown.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class UnderResolvedError : public NumericalError {
public:
    UnderResolvedError(const std::string& what, double required_extent)
        : NumericalError(what), required_extent_(required_extent) {}
    double required_extent() const { return required_extent_; }

private:
    double required_extent_;
};

class VerificationFailure : public std::runtime_error {
public:
    explicit VerificationFailure(const std::string& what) : std::runtime_error(what) {}
};

std::string format_double(double v);

}  // namespace levy
