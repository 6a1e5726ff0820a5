#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace labavs {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, malformed input, or a violated precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Too few in-window observations (or collinear ones) for the requested fit.
class DegenerateNeighborhood : public Error {
public:
    DegenerateNeighborhood(const std::string& what, std::size_t in_window)
        : Error(what + " (" + std::to_string(in_window) + " observations in window)"),
          in_window_(in_window) {}

    std::size_t in_window() const noexcept { return in_window_; }

private:
    std::size_t in_window_;
};

class DegenerateGrid : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double duality_gap)
        : Error(what + " (duality gap " + std::to_string(duality_gap) + ")"),
          duality_gap_(duality_gap) {}

    double duality_gap() const noexcept { return duality_gap_; }

private:
    double duality_gap_;
};

/// CSV or model-file content that cannot be interpreted.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Cross-validation or test evaluation that could not produce an error estimate.
class EvaluationError : public Error {
public:
    using Error::Error;
};

}  // namespace labavs
