#pragma once

#include <stdexcept>
#include <string>

namespace stablesde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model parameter lies outside its admissible set (alpha, dim, epsilon, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A mathematical domain condition is violated (t <= 0, alpha + beta <= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed call arguments: empty ensembles, mismatched grids, bad sizes.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Picard iteration for the mild Kolmogorov problem failed to contract.
class ContractionError : public Error {
public:
    using Error::Error;
};

/// A numerical scheme violated a property it must preserve (monotonicity, ordering).
class DiscretizationError : public Error {
public:
    using Error::Error;
};

/// An operation was invoked without the state it requires.
class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace stablesde
