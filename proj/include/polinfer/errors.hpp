#pragma once

#include <stdexcept>
#include <string>

namespace polinfer {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Graph-level problems: cycles, invalid DBN definitions.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Unknown variable or state label.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Evidence with zero probability under the model.
class ImpossibleEvidence : public Error {
public:
    using Error::Error;
};

/// The enumeration oracle refuses state spaces above its cap.
class StateSpaceTooLarge : public Error {
public:
    using Error::Error;
};

/// Intervention kinds applied where they are not defined (prior-do on a node with parents).
class SemanticsError : public Error {
public:
    using Error::Error;
};

/// Two interventions on the same variable with overlapping windows.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Intervention window outside [1, horizon] or inverted.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Malformed document. `field` carries a JSON-pointer-like location when known.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string field = {})
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Invalid numeric input to a pure function (bad utility weights, unnormalised prior, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace polinfer
