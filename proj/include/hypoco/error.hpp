#pragma once

#include <stdexcept>
#include <string>

namespace hypoco {

// Base class; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DivergentSeriesError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NotCertifiableError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace hypoco
