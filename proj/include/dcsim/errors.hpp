#pragma once

#include <stdexcept>
#include <string>

namespace dcsim {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON, CSV, RFC 3339 timestamps).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed JSON that does not match the config schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A config invariant does not hold.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of a model equation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A trace value is inconsistent with its declared unit.
class UnitError : public Error {
public:
    using Error::Error;
};

/// A time series does not span the requested grid.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// A value (episode start, fixed setpoint) is out of its permitted range.
class RangeError : public Error {
public:
    using Error::Error;
};

class EpisodeOverflowError : public Error {
public:
    using Error::Error;
};

/// A wire-protocol message could not be accepted.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace dcsim
