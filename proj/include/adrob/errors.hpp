#pragma once

#include <stdexcept>
#include <string>

namespace adrob {

/// Base class for all adrob errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or domain violations (bad alpha, non-PSD matrix, ...).
struct DomainError : Error {
    using Error::Error;
};

/// A linear pushforward produced scale 0: the law is a point mass and loss
/// evaluators must use the 0/1 indicator limit instead of a CDF.
struct DegenerateScaleError : Error {
    double location;
    explicit DegenerateScaleError(double loc)
        : Error("degenerate pushforward: scale = 0 (point mass at " +
                std::to_string(loc) + ")"),
          location(loc) {}
};

/// Quadrature failed to reach the requested tolerance within the evaluation
/// budget. Carries the partial estimate and its error bound.
struct QuadratureError : Error {
    double estimate;
    double error_bound;
    QuadratureError(double est, double err)
        : Error("quadrature did not converge (estimate=" + std::to_string(est) +
                ", error=" + std::to_string(err) + ")"),
          estimate(est),
          error_bound(err) {}
};

/// The robust KKT system admits only v = 0 (2*eps*d||0||_q contains
/// theta_bar): no direction survives the regularizer.
struct DegenerateClassifierError : Error {
    using Error::Error;
};

/// A singular SPD system whose right-hand side is not in the range.
struct InconsistentSystemError : Error {
    using Error::Error;
};

/// Nearly parallel inputs to a formula that requires independence.
struct IllConditionedError : Error {
    using Error::Error;
};

/// Iterative solver did not meet its residual tolerance.
struct SolverError : Error {
    double residual;
    SolverError(const std::string& what, double res) : Error(what), residual(res) {}
};

}  // namespace adrob
