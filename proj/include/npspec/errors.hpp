#pragma once

#include <stdexcept>
#include <string>

namespace npspec {

/// Base class for all numerical / domain errors raised by the library.
/// I/O problems use IoError instead so callers can map them separately.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidShapeError : public Error {
public:
    using Error::Error;
};

class DegenerateCoordinatesError : public Error {
public:
    using Error::Error;
};

class DegenerateParameterizationError : public Error {
public:
    using Error::Error;
};

class InvalidResolutionError : public Error {
public:
    using Error::Error;
};

class GridDegeneracyError : public Error {
public:
    using Error::Error;
};

class DiscretizationFailureError : public Error {
public:
    using Error::Error;
};

class MetricIndefiniteError : public Error {
public:
    using Error::Error;
};

class SymmetrizationFailureError : public Error {
public:
    using Error::Error;
};

class InvalidSourceError : public Error {
public:
    using Error::Error;
};

class SingularResolventError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class InsufficientTruncationError : public Error {
public:
    using Error::Error;
};

class BoundInapplicableError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SingularityError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace npspec
