#pragma once

#include <stdexcept>
#include <string>

namespace purcell {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition (non-positive frequency,
/// negative mass ratio, evaluation in the wrong phase, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation exactly at the critical point, where neither phase formula
/// assigns a value.
class CriticalPoint : public DomainError {
public:
    CriticalPoint() : DomainError("rate is undefined at the critical point t = 0") {}
};

/// The one-loop vacuum polarization reached the Landau-pole guard.
class PoleReached : public Error {
public:
    explicit PoleReached(double pi)
        : Error("vacuum polarization " + std::to_string(pi) + " reached the Landau-pole guard"),
          pi_(pi) {}

    double pi() const noexcept { return pi_; }

private:
    double pi_;
};

// Quadrature failures.

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class TailTooFat : public Error {
public:
    using Error::Error;
};

class IllConditioned : public Error {
public:
    using Error::Error;
};

// Estimator failures.

class InsufficientData : public Error {
public:
    using Error::Error;
};

class AllMasked : public InsufficientData {
public:
    using InsufficientData::InsufficientData;
};

class DegenerateJacobian : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

/// Malformed curve or config input.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace purcell
