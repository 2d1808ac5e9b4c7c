#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace e1lab {

/// Invalid input: wrong sizes, non-normalized forms, pole masses out of range.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver hit its cap or a limit procedure failed to settle.
/// `residual` is the last measured residual, NaN when none applies.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double residual = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

/// Malformed scenario or result file.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace e1lab
