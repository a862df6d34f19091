#pragma once

#include <functional>

namespace adrob {

struct QuadratureOptions {
    double tol = 1e-10;
    int max_evals = 100000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod 15-point quadrature on [a, b]. Splits the worst
/// interval until the summed error estimate drops below
/// max(tol, tol * |value|) or the evaluation budget runs out.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts = {});

}  // namespace adrob
