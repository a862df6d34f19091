#include "adrob/stable.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "adrob/linalg.hpp"

namespace adrob {

namespace {

// Standardized CDF by Fourier inversion:
//   Phi_alpha(z) = 1/2 + (1/pi) * int_0^inf sin(z t) exp(-t^alpha) / t dt.
// Integrated on [0, T] with exp(-T^alpha) < 1e-16; beyond |z| ~ 80 the
// integrand oscillates too fast for the budget and the polynomial tail
// series takes over.
constexpr double kTailSwitch = 80.0;

double tail_series(double z, double alpha) {
    // P(X > z) = (1/pi) sum_k (-1)^{k+1} Gamma(alpha k) sin(k pi alpha / 2) z^{-alpha k} / k!
    double acc = 0.0, fact = 1.0;
    for (int k = 1; k <= 3; ++k) {
        fact *= k;
        acc += (k % 2 ? 1.0 : -1.0) * std::tgamma(alpha * k) *
               std::sin(k * M_PI * alpha / 2.0) * std::pow(z, -alpha * k) / fact;
    }
    return acc / M_PI;
}

double phi_alpha_quadrature(double z, double alpha, const QuadratureOptions& quad) {
    if (z == 0.0) return 0.5;
    if (std::abs(z) > kTailSwitch) {
        double tail = tail_series(std::abs(z), alpha);
        return z > 0.0 ? 1.0 - tail : tail;
    }
    const double T = std::pow(16.0 * std::log(10.0), 1.0 / alpha);
    auto integrand = [z, alpha](double t) {
        if (t == 0.0) return z;  // sin(zt)/t -> z
        return std::sin(z * t) * std::exp(-std::pow(t, alpha)) / t;
    };
    QuadratureResult r = integrate_adaptive(integrand, 0.0, T, quad);
    if (!r.converged)
        throw QuadratureError(0.5 + r.value / M_PI, r.error / M_PI);
    return std::min(1.0, std::max(0.0, 0.5 + r.value / M_PI));
}

}  // namespace

MultivariateSas MultivariateSas::independent(double alpha, Eigen::VectorXd location,
                                             Eigen::VectorXd scales) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("MultivariateSas: alpha in (0, 2]");
    if (scales.size() != location.size())
        throw DomainError("MultivariateSas: scales/location dimension mismatch");
    if ((scales.array() <= 0.0).any()) throw DomainError("MultivariateSas: scales must be > 0");
    MultivariateSas mv;
    mv.kind = Kind::IndependentComponents;
    mv.alpha = alpha;
    mv.location = std::move(location);
    mv.scales = std::move(scales);
    return mv;
}

MultivariateSas MultivariateSas::elliptical(double alpha, Eigen::VectorXd location,
                                            Eigen::MatrixXd shape) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("MultivariateSas: alpha in (0, 2]");
    if (shape.rows() != shape.cols() || shape.rows() != location.size())
        throw DomainError("MultivariateSas: shape dimension mismatch");
    if (!shape.isApprox(shape.transpose(), 1e-12))
        throw DomainError("MultivariateSas: shape must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw DomainError("MultivariateSas: shape must be PSD");
    MultivariateSas mv;
    mv.kind = Kind::EllipticallyContoured;
    mv.alpha = alpha;
    mv.location = std::move(location);
    mv.shape = std::move(shape);
    return mv;
}

double sas_cdf(const SasParams& params, double x, const QuadratureOptions& quad) {
    if (!std::isfinite(x)) throw DomainError("sas_cdf: x must be finite");
    const double z = (x - params.location) / params.scale;
    if (params.alpha == 2.0) return normal_cdf(z * M_SQRT1_2);  // N(0, 2)
    if (params.alpha == 1.0) return 0.5 + std::atan(z) / M_PI;
    return phi_alpha_quadrature(z, params.alpha, quad);
}

double sas_cdf_generic(const SasParams& params, double x, const QuadratureOptions& quad) {
    const double z = (x - params.location) / params.scale;
    return phi_alpha_quadrature(z, params.alpha, quad);
}

double sas_standard_draw(double alpha, Rng& rng) {
    if (alpha == 2.0) return M_SQRT2 * rng.normal();
    const double u = rng.uniform(-M_PI_2, M_PI_2);
    if (alpha == 1.0) return std::tan(u);
    const double w = rng.exponential();
    // Chambers-Mallows-Stuck, beta = 0.
    return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
}

Eigen::VectorXd sas_sample(const SasParams& params, Rng& rng, std::int64_t n) {
    if (n < 1) throw DomainError("sas_sample: n must be >= 1");
    Eigen::VectorXd out(n);
    for (std::int64_t i = 0; i < n; ++i)
        out[i] = params.location + params.scale * sas_standard_draw(params.alpha, rng);
    return out;
}

double positive_stable_draw(double alpha_half, Rng& rng) {
    if (!(alpha_half > 0.0 && alpha_half < 1.0))
        throw DomainError("positive_stable_draw: index must be in (0, 1)");
    // Kanter's representation: A = (a(U)/W)^{(1-a)/a} has exactly
    // E exp(-uA) = exp(-u^a) with no extra scaling constant.
    const double a = alpha_half;
    const double u = rng.uniform() * M_PI;
    const double w = rng.exponential();
    const double au = std::pow(std::sin(a * u), a / (1.0 - a)) * std::sin((1.0 - a) * u) /
                      std::pow(std::sin(u), 1.0 / (1.0 - a));
    return std::pow(au / w, (1.0 - a) / a);
}

SasParams linear_pushforward(const MultivariateSas& mv, const Eigen::VectorXd& w, double b) {
    if (w.size() != mv.location.size()) throw DomainError("linear_pushforward: dimension mismatch");
    const double mu = w.dot(mv.location) + b;
    double scale = 0.0;
    if (mv.kind == MultivariateSas::Kind::IndependentComponents) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            acc += std::pow(std::abs(mv.scales[i] * w[i]), mv.alpha);
        scale = std::pow(acc, 1.0 / mv.alpha);
    } else {
        double quad = w.dot(mv.shape * w);
        scale = std::sqrt(std::max(0.0, quad));
    }
    if (scale == 0.0) throw DegenerateScaleError(mu);
    return SasParams(mv.alpha, scale, mu);
}

Eigen::MatrixXd sas_ec_sample(const MultivariateSas& mv, Rng& rng, std::int64_t n) {
    if (mv.kind != MultivariateSas::Kind::EllipticallyContoured)
        throw DomainError("sas_ec_sample: EC distribution required");
    const Eigen::Index d = mv.location.size();
    const Eigen::MatrixXd root = spd_sqrt(mv.shape);
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd g(d);
    for (std::int64_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) g[j] = rng.normal();
        double amp = M_SQRT2;
        if (mv.alpha < 2.0) amp *= std::sqrt(positive_stable_draw(mv.alpha / 2.0, rng));
        out.row(i) = (mv.location + amp * (root * g)).transpose();
    }
    return out;
}

}  // namespace adrob
