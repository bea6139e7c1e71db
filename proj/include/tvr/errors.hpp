#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tvr {

/// Invalid arguments: unknown ids, mismatched dimensions, violated preconditions.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A model that violates the automaton invariants.
class ModelError : public UsageError {
public:
    using UsageError::UsageError;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }

    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A theoretical bound is larger than the enumeration budget the caller allowed.
class BoundTooLarge : public std::runtime_error {
public:
    BoundTooLarge(const std::string& what, std::string bound)
        : std::runtime_error(what + " (bound " + bound + ")"), bound_(std::move(bound))
    {
    }

    [[nodiscard]] const std::string& bound() const { return bound_; }

private:
    std::string bound_;
};

/// Malformed certificate (as opposed to a well-formed certificate that fails to check).
class CertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tvr
