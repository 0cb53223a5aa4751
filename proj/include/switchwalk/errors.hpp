#pragma once

#include <stdexcept>
#include <string>

namespace switchwalk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operands live on different lattices.
class SpanMismatch : public Error {
public:
    using Error::Error;
};

// An operation was called outside its domain (bad window, wrong sign, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A walk description violates the oscillation assumption or is malformed.
class ValidationError : public Error {
public:
    using Error::Error;
};

// The exact backend cannot represent the requested quantity (irrational
// Wiener-Hopf split); callers fall back to the float64 backend.
class InexactError : public Error {
public:
    using Error::Error;
};

// A numerical routine failed its own consistency checks.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace switchwalk
