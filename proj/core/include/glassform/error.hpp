#pragma once

#include <stdexcept>
#include <string>

namespace glassform {

// All library failures derive from Error so callers (the CLI in particular)
// can map them onto exit codes without knowing every subtype.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation
// (negative time, WLF singularity, negative aspheric radicand, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Request outside a sampled range (extrapolation, grid mismatch).
class RangeError : public Error {
public:
    using Error::Error;
};

// Curve construction failed (offset self-intersection, non-monotone grid).
class GeometryError : public Error {
public:
    using Error::Error;
};

// Invalid user-supplied value or configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

// Persisted file could not be read back (schema, truncation, tag mismatch).
class LoadError : public Error {
public:
    using Error::Error;
};

}  // namespace glassform
