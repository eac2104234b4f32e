#pragma once

#include <stdexcept>
#include <string>

namespace scalocast {

/// Base of every error the library raises. The CLI maps the concrete type
/// onto a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument values (window sizes, probabilities, lengths).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed or insufficient input data.
class InputError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// A model or sample does not satisfy the channel contract it was built for.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Non-finite losses, failed factorizations.
class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A statistic has no defined value for the given data (constant ranks,
/// all-zero paired differences).
class UndefinedStatistic : public Error {
public:
    using Error::Error;
};

} // namespace scalocast
