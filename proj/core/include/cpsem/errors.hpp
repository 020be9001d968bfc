#pragma once

#include <stdexcept>
#include <string>

namespace cpsem {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical failure inside an algorithm: degenerate weights, singular
/// covariances, non-finite states. Runs hitting one of these abort.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidWeights : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidTheta : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class ConditioningLengthMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class LengthMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class EmptyInput : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class AllWeightsDegenerate : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonFiniteState : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonFiniteLogDensity : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularInnovation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularEnsembleCovariance : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateRegressor : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Raised by the EM drivers when an iteration fails; keeps the iteration
/// index next to the original diagnostic.
class EstimationAborted : public NumericalError {
public:
    EstimationAborted(int iteration, const std::string& what)
        : NumericalError("iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

}  // namespace cpsem
