#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace frontal {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression text could not be parsed. `position` is a 0-based byte offset.
class ParseError : public Error {
public:
    enum class Kind { Syntax, UnknownIdentifier, NonSmooth };

    ParseError(Kind kind, std::size_t position, const std::string& message)
        : Error(message + " at position " + std::to_string(position)),
          kind_(kind), position_(position) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t position() const noexcept { return position_; }

private:
    Kind kind_;
    std::size_t position_;
};

/// Evaluation outside the real domain of an expression (log/sqrt of a
/// non-positive value, division by zero, ...), or a bad variable binding.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Scene text or scene data is malformed. Line/column are 1-based, 0 if unknown.
class SceneError : public Error {
public:
    SceneError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
        : Error(line ? message + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"
                     : message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Normal frame fails orthonormality or tangency.
class FrameError : public Error {
public:
    using Error::Error;
};

/// A pointwise quantity was requested at a singular or ill-conditioned point.
class RegularityError : public Error {
public:
    using Error::Error;
};

/// Root isolation needs a finer grid.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Contour tracing produced an inconsistent curve set.
class TracingError : public Error {
public:
    using Error::Error;
};

/// The frontal violates a hypothesis of the requested computation.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// Too many sampled directions hit the bad set of degenerate height functions.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Quadrature or sampling did not reach the requested accuracy.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& message, double estimate, double error)
        : Error(message), estimate_(estimate), error_(error) {}

    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

} // namespace frontal
