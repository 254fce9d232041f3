#pragma once
#include <stdexcept>
#include <string>

namespace cpgraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input data (non-finite entries, bad shapes).
class InputError : public Error {
public:
    using Error::Error;
};

/// Inconsistent hyperparameters or missing companion inputs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A value outside the mathematical domain of an operation, e.g. log det of
/// a matrix that is not positive definite.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The core-score linear program has an empty feasible set.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown inside a solver.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace cpgraph
