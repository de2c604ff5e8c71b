#pragma once

#include <stdexcept>
#include <string>

namespace episens {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind {
    input = 1,      ///< malformed files, bad configuration, out-of-range requests
    numerical = 2,  ///< integration blow-up, non-convergence, degenerate statistics
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// seir
class InvalidParams : public InputError { using InputError::InputError; };
class NonFiniteState : public NumericalError { using NumericalError::NumericalError; };

// data ingest
class MissingColumn : public InputError { using InputError::InputError; };
class MalformedRow : public InputError { using InputError::InputError; };
class InconsistentSeries : public InputError { using InputError::InputError; };
class OutOfRange : public InputError { using InputError::InputError; };

// calibration
class LengthMismatch : public InputError { using InputError::InputError; };
class DegenerateSeries : public NumericalError { using NumericalError::NumericalError; };
class InfeasibleBounds : public InputError { using InputError::InputError; };
class NoConvergence : public NumericalError { using NumericalError::NumericalError; };

// uq
class EmptySupport : public InputError { using InputError::InputError; };
class EmptySample : public NumericalError { using NumericalError::NumericalError; };
class FailureRateExceeded : public NumericalError { using NumericalError::NumericalError; };

// gsa
class TooFewSamples : public InputError { using InputError::InputError; };
class ZeroDelta : public NumericalError { using NumericalError::NumericalError; };
class DegenerateVariance : public NumericalError { using NumericalError::NumericalError; };

}  // namespace episens
