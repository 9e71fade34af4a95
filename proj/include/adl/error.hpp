#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace adl {

/// Broad failure classes. Each maps to one CLI exit code.
enum class ErrorKind { Config, Data, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// 2 config, 3 data, 4 numerical/structure violation.
    int exit_code() const noexcept
    {
        switch (kind_) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Numerical: return 4;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

// --- configuration / parameter-domain failures (exit 2) ---

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DegenerateNoiseError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class ConversionError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class IndexError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class DimensionError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// --- input data failures (exit 3) ---

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class RankError : public DataError {
public:
    RankError(const std::string& what, std::size_t effective_rank)
        : DataError(what + " (effective rank " + std::to_string(effective_rank) + ")"),
          effective_rank_(effective_rank) {}

    std::size_t effective_rank() const noexcept { return effective_rank_; }

private:
    std::size_t effective_rank_;
};

// --- numerical failures (exit 4) ---

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Thrown by the steppers when a state entry leaves the finite range.
/// Carries the last finite state as flat (q, p, friction) data.
class DivergenceError : public NumericalError {
public:
    DivergenceError(std::size_t step, std::vector<double> last_q,
                    std::vector<double> last_p, double last_friction)
        : NumericalError("trajectory diverged at step " + std::to_string(step)),
          step_(step), last_q_(std::move(last_q)), last_p_(std::move(last_p)),
          last_friction_(last_friction) {}

    std::size_t step() const noexcept { return step_; }
    const std::vector<double>& last_q() const noexcept { return last_q_; }
    const std::vector<double>& last_p() const noexcept { return last_p_; }
    double last_friction() const noexcept { return last_friction_; }

private:
    std::size_t step_;
    std::vector<double> last_q_;
    std::vector<double> last_p_;
    double last_friction_;
};

class StructureViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(const std::string& what, double condition_estimate)
        : NumericalError(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

class EnvelopeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace adl
