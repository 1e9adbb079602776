#pragma once

#include <stdexcept>
#include <string>

namespace leakload {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range numeric input, unknown preset names, bad configs.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Text-format errors (netlists, key=value files). Carries a 1-based line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

/// Root finding or fixed-point iteration failed. Keeps the best iterate.
class SolverError : public Error {
public:
    SolverError(const std::string& message, double best_voltage, double residual)
        : Error(message), best_voltage_(best_voltage), residual_(residual) {}

    [[nodiscard]] double best_voltage() const noexcept { return best_voltage_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double best_voltage_;
    double residual_;
};

}  // namespace leakload
