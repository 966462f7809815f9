#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fragrate {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    GridMismatch() : Error("samples live on different grids") {}
};

class NonFiniteError : public Error {
public:
    NonFiniteError(std::size_t index, const std::string& what)
        : Error(what + " (non-finite value at index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

// Raised when the probability transform integral does not converge.
class IntegrabilityError : public Error {
public:
    using Error::Error;
};

// Raised when |k F P - 1| (or its perturbed form) vanishes on the band.
class HypothesisFailure : public Error {
public:
    HypothesisFailure(double xi, double min_value)
        : Error("kernel symbol too close to zero: min |k F P - 1| = " + std::to_string(min_value) +
                " at xi = " + std::to_string(xi)),
          xi_(xi), min_value_(min_value) {}
    double xi() const { return xi_; }
    double min_value() const { return min_value_; }

private:
    double xi_;
    double min_value_;
};

class AtomicKernelError : public Error {
public:
    AtomicKernelError()
        : Error("probability has no density part; atomic kernels act only through apply_K") {}
};

class CflViolation : public Error {
public:
    CflViolation(double cfl, double limit, std::size_t suggested)
        : Error("CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(limit) +
                "; use at least n_steps = " + std::to_string(suggested)),
          cfl_(cfl), suggested_(suggested) {}
    double cfl() const { return cfl_; }
    std::size_t suggested_steps() const { return suggested_; }

private:
    double cfl_;
    std::size_t suggested_;
};

class WrongFilterError : public Error {
public:
    using Error::Error;
};

class SideConditionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace fragrate
