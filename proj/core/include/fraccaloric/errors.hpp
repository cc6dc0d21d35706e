#pragma once

#include <stdexcept>
#include <string>

namespace fc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct GeometryFailure : Error {
    using Error::Error;
};
struct AssemblyFailure : Error {
    using Error::Error;
};
struct SolverFailure : Error {
    using Error::Error;
};
struct IntegrabilityError : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct InsufficientResolution : Error {
    using Error::Error;
};
struct NonConvergenceError : Error {
    NonConvergenceError() : Error("boundary ratio trace did not converge") {}
    using Error::Error;
};

// Quadrature that did not reach its tolerance reports what it achieved.
struct QuadratureFailure : Error {
    double achieved_error;
    QuadratureFailure(const std::string& what, double err)
        : Error(what + " (achieved error " + std::to_string(err) + ")"),
          achieved_error(err) {}
};

}  // namespace fc
