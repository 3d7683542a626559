#pragma once

#include <stdexcept>
#include <string>

namespace mg1 {

/// Root of the library's error hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input problems: malformed files or violated model invariants.
/// CLI maps these to exit status 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical failures: singular solves, exhausted iteration budgets, …
/// CLI maps these to exit status 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Model file could not be parsed.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

/// A structural invariant of the model (or a CLI argument) is violated.
/// Carries the first violated invariant and its numerical slack.
class ValidationError : public InputError {
public:
    ValidationError(const std::string& invariant, double slack)
        : InputError(invariant + " (slack " + std::to_string(slack) + ")"),
          invariant_(invariant),
          slack_(slack) {}
    explicit ValidationError(const std::string& invariant)
        : InputError(invariant), invariant_(invariant), slack_(0.0) {}
    const std::string& invariant() const { return invariant_; }
    double slack() const { return slack_; }

private:
    std::string invariant_;
    double slack_;
};

/// All cycle displacements of the additive kernel are zero; the period is
/// undefined, which contradicts the standing irreducibility assumptions.
class PeriodUndefined : public InputError {
public:
    using InputError::InputError;
};

/// A fundamental matrix fails the admissible normal forms (one irreducible
/// class plus a triangular remainder); signals an invalid input model.
class ShapeViolation : public InputError {
public:
    using InputError::InputError;
};

/// A pivot fell below the singularity threshold.
class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iteration exhausted its budget without meeting its tolerance.
class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A series was evaluated at or beyond its radius of convergence.
class OutsideRadius : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A boundary generating function was evaluated at a declared pole.
class AtPole : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A quantity proven positive came out non-positive beyond tolerance;
/// signals an implementation or model inconsistency.
class PositivityViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The dominant-pole intersection lost its mandatory base point.
class EmptyIntersection : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Too few usable levels for an empirical estimate.
class InsufficientLevels : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The tail-remainder certificate failed at the requested depth.
class RemainderTooLarge : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace mg1
