#pragma once

#include <stdexcept>
#include <string>

namespace smm {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters (index-set specs, CLI flags, configs).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A multi-index expected to be present in an index set was not found.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Matrix dimensions are incompatible with the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Problem instance exceeds a documented size guard.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Diffusion model violates its assumptions (e.g. loss of positivity).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Iterative solve failed or produced an unacceptable residual.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Not enough samples for a least-squares fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Reference statistics have zero norm, so relative errors are undefined.
class DegenerateReferenceError : public Error {
public:
    using Error::Error;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace smm
