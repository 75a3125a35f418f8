#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecsim {

/// Broad failure class; the CLI maps each one to a process exit code.
enum class ErrorKind {
    Parse,      ///< malformed input file or flags
    Domain,     ///< input outside the mathematical domain of an operation
    Numerical,  ///< blow-up, instability, failed bracketing
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class UnsupportedModelError : public DomainError {
public:
    using DomainError::DomainError;
};

class ConfigurationError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Non-finite state produced by a time integrator.
class IntegrationBlowup : public NumericalError {
public:
    explicit IntegrationBlowup(std::size_t step)
        : NumericalError("integration blow-up: non-finite state at step " + std::to_string(step)),
          step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class BracketingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ShapeError : public DomainError {
public:
    using DomainError::DomainError;
};

class DivergenceError : public DomainError {
public:
    using DomainError::DomainError;
};

class ReferenceError : public DomainError {
public:
    using DomainError::DomainError;
};

class OverdraftError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Broken internal invariant; reaching it is a bug.
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace ecsim
