#pragma once

#include <stdexcept>
#include <string>

namespace recsys {

/// Raised when an input file is structurally malformed (bad arity,
/// non-numeric fields, missing header). Messages carry the line number.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a value is well-formed but outside its allowed domain
/// (rating out of range, non-binary feature cell, duplicate entry).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an iterative optimizer produces non-finite state.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace recsys
