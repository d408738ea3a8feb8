#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mapcent {

/// Malformed input text (edge lists, partition files, ranges).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a precondition.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a result.
class ComputationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public ComputationError {
public:
    ConvergenceError(const std::string &what, double residual)
        : ComputationError(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class RewiringError : public ComputationError {
    using ComputationError::ComputationError;
};

} // namespace mapcent
