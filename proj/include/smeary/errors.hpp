#pragma once

#include <stdexcept>
#include <string>

namespace smeary {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong dimension, empty sample, out-of-range parameter.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A point landed within tolerance of the antipode of the current base point.
class CutLocusError : public Error {
public:
    using Error::Error;
};

/// Differentiation under the integral is not justified for the requested
/// order in this dimension.
class ValidityError : public Error {
public:
    using Error::Error;
};

/// Quadrature did not reach its tolerance.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate, double error)
        : Error(what), estimate_(estimate), error_(error) {}
    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

/// Iterative solver failed; the concrete solver attaches its best iterate.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A computed quantity violated an analytic bound it is proven to satisfy.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

/// Input file is missing columns or contains unparsable rows.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Requested model has no admissible parameters (e.g. no flat-Hessian weight).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Monte Carlo experiment exceeded its failure budget.
class ExperimentError : public Error {
public:
    using Error::Error;
};

}  // namespace smeary
