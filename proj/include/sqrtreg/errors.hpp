#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sqrtreg {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

class DimensionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "dimension"; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

// Index set not allowed for weak decomposability of the given norm.
class DisallowedSet : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "disallowed_set"; }
};

// Residual norm collapsed: the estimator interpolates the data (overfits).
class InterpolationError : public Error {
public:
    InterpolationError(const std::string& what, Eigen::VectorXd last_beta = {})
        : Error(what), last_beta_(std::move(last_beta)) {}
    const char* kind() const noexcept override { return "interpolation"; }
    const Eigen::VectorXd& last_beta() const noexcept { return last_beta_; }

private:
    Eigen::VectorXd last_beta_;
};

class DegenerateDesign : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "degenerate_design"; }
};

class NumericalError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace sqrtreg
