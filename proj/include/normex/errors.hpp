#pragma once

#include <stdexcept>
#include <string>

namespace normex {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (q outside (0,1), y <= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A moment (or a quantity built from one) does not exist for the given tail index.
class UndefinedMomentError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The tail index is valid but outside the range the method supports (e.g. k(alpha) > 7).
class UnsupportedRangeError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Quadrature or root finding did not reach the requested tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved = 0.0)
        : Error(what), achieved_(achieved) {}

    /// Achieved error estimate (quadrature) or final bracket width (root finding).
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// A discretisation grid cannot hold the required probability mass.
class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A request would exceed a configured memory or size cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

}  // namespace normex
