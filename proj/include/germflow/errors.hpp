#pragma once

#include <stdexcept>
#include <string>

namespace germflow {

// Base class for everything the engine can refuse to do.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mixing exact and approximate scalars, or incompatible exact extensions
// (cyclotomic with radical, radicals over different minimal polynomials).
struct ModeError : Error {
    using Error::Error;
};

// Exact division by zero, or approximate division below tolerance.
struct DivisionByZero : Error {
    using Error::Error;
};

// A precondition of an operation does not hold (singular linear part,
// nonzero constant term, unit-circle multiplier, non-diagonal Jacobian, ...).
struct DomainError : Error {
    using Error::Error;
};

// The requested value exists but has no exact representation in the current
// scalar domain; the caller may retry in approximate mode.
struct NotRepresentable : Error {
    using Error::Error;
};

// An infinite series failed to reach the termination tolerance within the
// iteration cap.
struct ConvergenceError : Error {
    using Error::Error;
};

struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t at)
        : Error(msg + " (at byte " + std::to_string(at) + ")"), offset(at) {}
};

}  // namespace germflow
