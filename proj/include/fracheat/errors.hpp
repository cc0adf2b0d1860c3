#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracheat {

/// Argument outside the mathematical domain of an operation (poles, negative eigenvalues, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A result could not be produced to the requested accuracy.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double error_estimate)
        : std::runtime_error(what), error_estimate_(error_estimate) {}

    double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

/// Inconsistent or malformed request (mismatched grids, bad config keys, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values appeared while iterating.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t node)
        : std::runtime_error(what), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

}  // namespace fracheat
