#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "adrob/errors.hpp"
#include "adrob/quadrature.hpp"
#include "adrob/rng.hpp"

namespace adrob {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Univariate symmetric alpha-stable law with characteristic function
/// exp(i t mu - |c t|^alpha). alpha=2 is N(mu, 2c^2), alpha=1 is Cauchy.
struct SasParams {
    double alpha;
    double scale;
    double location;

    SasParams(double a, double c, double mu) : alpha(a), scale(c), location(mu) {
        if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("SasParams: alpha must be in (0, 2]");
        if (!(scale > 0.0)) throw DomainError("SasParams: scale must be positive");
    }
};

/// Multivariate SaS: either independent components with per-coordinate
/// scales, or elliptically contoured with a PSD shape matrix.
struct MultivariateSas {
    enum class Kind { IndependentComponents, EllipticallyContoured };

    Kind kind;
    double alpha;
    Eigen::VectorXd location;
    Eigen::VectorXd scales;  // IC only, all > 0
    Eigen::MatrixXd shape;   // EC only, symmetric PSD

    static MultivariateSas independent(double alpha, Eigen::VectorXd location,
                                       Eigen::VectorXd scales);
    static MultivariateSas elliptical(double alpha, Eigen::VectorXd location,
                                      Eigen::MatrixXd shape);
};

/// CDF of the SaS law, standardized internally. Dispatches to the normal
/// (alpha=2) and Cauchy (alpha=1) closed forms; otherwise numeric Fourier
/// inversion. Throws QuadratureError if the budget runs out.
double sas_cdf(const SasParams& params, double x, const QuadratureOptions& quad = {});

/// The quadrature path with no special-case dispatch, exposed so the
/// closed-form branches can be cross-checked against it.
double sas_cdf_generic(const SasParams& params, double x, const QuadratureOptions& quad = {});

/// i.i.d. draws via the Chambers-Mallows-Stuck transform.
Eigen::VectorXd sas_sample(const SasParams& params, Rng& rng, std::int64_t n);

/// One standardized SaS variate (scale 1, location 0).
double sas_standard_draw(double alpha, Rng& rng);

/// Totally skewed positive (alpha/2)-stable subordinator draw A with
/// Laplace transform E exp(-uA) = exp(-u^{alpha/2}); requires alpha < 2.
double positive_stable_draw(double alpha_half, Rng& rng);

/// Exact univariate law of w'X + b under either multivariate kind.
/// IC scale: (sum_i |c_i w_i|^alpha)^{1/alpha}; EC scale: sqrt(w' Sigma w).
/// Throws DegenerateScaleError when the resulting scale is 0.
SasParams linear_pushforward(const MultivariateSas& mv, const Eigen::VectorXd& w, double b);

/// n samples (rows) from an elliptically contoured SaS via the sub-Gaussian
/// representation X = theta + sqrt(2 A) Sigma^{1/2} g.
Eigen::MatrixXd sas_ec_sample(const MultivariateSas& mv, Rng& rng, std::int64_t n);

}  // namespace adrob
