#include <algorithm>
#include <cmath>
#include <vector>

#include "adrob/stable.hpp"
#include "doctest.h"

using namespace adrob;

namespace {

// Independent oracle: plain trapezoid integration of the Fourier-inversion
// integrand sin(zt) e^{-t^alpha} / t on a very fine fixed grid.
double cdf_trapezoid_oracle(double alpha, double z) {
    const double T = std::pow(40.0 * std::log(10.0), 1.0 / alpha);
    const int n = 4000000;
    const double h = T / n;
    double acc = 0.5 * z;  // t -> 0 limit of the integrand
    for (int i = 1; i < n; ++i) {
        double t = i * h;
        acc += std::sin(z * t) * std::exp(-std::pow(t, alpha)) / t;
    }
    return 0.5 + (acc * h) / M_PI;
}

double empirical_cdf(const Eigen::VectorXd& draws, double x) {
    return static_cast<double>((draws.array() <= x).count()) /
           static_cast<double>(draws.size());
}

}  // namespace

TEST_CASE("univariate cdf closed forms") {
    CHECK(sas_cdf({1.0, 1.0, 0.0}, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sas_cdf({1.0, 1.0, 0.0}, 1.0) == doctest::Approx(0.75).epsilon(1e-14));
    // alpha=2 with scale c is N(mu, 2c^2)
    CHECK(sas_cdf({2.0, 1.0, 0.0}, 1.0) ==
          doctest::Approx(normal_cdf(1.0 / std::sqrt(2.0))).epsilon(1e-14));
    CHECK(sas_cdf({2.0, 1.0, 0.0}, 1.0) == doctest::Approx(0.760250).epsilon(1e-6));
}

TEST_CASE("quadrature path agrees with a fine-grid trapezoid oracle") {
    CHECK(std::abs(sas_cdf({1.5, 1.0, 0.0}, 0.7) - cdf_trapezoid_oracle(1.5, 0.7)) < 1e-8);
}

TEST_CASE("closed-form dispatch agrees with the generic quadrature path") {
    for (double alpha : {1.0, 2.0})
        for (double x = -10.0; x <= 10.0; x += 0.5)
            CHECK(std::abs(sas_cdf({alpha, 1.0, 0.0}, x) -
                           sas_cdf_generic({alpha, 1.0, 0.0}, x)) < 1e-7);
}

TEST_CASE("cdf symmetry and monotonicity") {
    for (double alpha : {0.8, 1.0, 1.3, 1.7, 2.0}) {
        SasParams p{alpha, 2.0, 0.7};
        for (double z = 0.0; z <= 30.0; z += 1.5)
            CHECK(sas_cdf(p, 0.7 + z) + sas_cdf(p, 0.7 - z) ==
                  doctest::Approx(1.0).epsilon(1e-9));
        double prev = -1.0;
        for (double x = -20.0; x <= 20.0; x += 0.25) {
            double v = sas_cdf(p, x);
            CHECK(v > prev);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("cms sampler statistics") {
    const std::int64_t n = 1000000;
    Rng rng(42);
    SUBCASE("cauchy median") {
        Eigen::VectorXd x = sas_sample({1.0, 1.0, 0.0}, rng, n);
        std::vector<double> v(x.data(), x.data() + n);
        std::nth_element(v.begin(), v.begin() + n / 2, v.end());
        CHECK(std::abs(v[n / 2]) < 0.01);
    }
    SUBCASE("gaussian mean") {
        Eigen::VectorXd x = sas_sample({2.0, 1.0, 3.0}, rng, n);
        double se = std::sqrt(2.0 / static_cast<double>(n));
        CHECK(std::abs(x.mean() - 3.0) < 5.0 * se);
    }
    SUBCASE("alpha=1.5 empirical cdf vs sas_cdf") {
        Eigen::VectorXd x = sas_sample({1.5, 1.0, 0.0}, rng, n);
        for (double pt : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            double p = sas_cdf({1.5, 1.0, 0.0}, pt);
            double tol = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            CHECK(std::abs(empirical_cdf(x, pt) - p) < tol);
        }
    }
}

TEST_CASE("linear pushforward") {
    Eigen::VectorXd w2(2), th(2);
    SUBCASE("ic l2") {
        w2 << 3, 4;
        auto mv = MultivariateSas::independent(2.0, Eigen::VectorXd::Zero(2),
                                               Eigen::VectorXd::Ones(2));
        SasParams out = linear_pushforward(mv, w2, 0.0);
        CHECK(out.scale == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(out.location == doctest::Approx(0.0));
    }
    SUBCASE("ic l1") {
        w2 << 1, 1;
        th << 1, -1;
        auto mv = MultivariateSas::independent(1.0, th, Eigen::VectorXd::Ones(2));
        SasParams out = linear_pushforward(mv, w2, 2.0);
        CHECK(out.scale == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(out.location == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("ec quadratic form") {
        w2 << 1, 1;
        Eigen::MatrixXd sig = Eigen::Vector2d(4, 1).asDiagonal();
        auto mv = MultivariateSas::elliptical(1.5, Eigen::VectorXd::Zero(2), sig);
        SasParams out = linear_pushforward(mv, w2, 0.0);
        CHECK(out.scale == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
        CHECK(out.alpha == doctest::Approx(1.5));
    }
    SUBCASE("degenerate scale") {
        Eigen::MatrixXd sig = Eigen::Vector2d(1, 0).asDiagonal();
        auto mv = MultivariateSas::elliptical(1.5, Eigen::VectorXd::Zero(2), sig);
        w2 << 0, 1;
        CHECK_THROWS_AS(linear_pushforward(mv, w2, 0.0), DegenerateScaleError);
    }
}

TEST_CASE("elliptically contoured sampling") {
    const std::int64_t n = 1000000;
    Rng rng(7);
    SUBCASE("alpha=2 reduces to gaussian with covariance 2I") {
        auto mv = MultivariateSas::elliptical(2.0, Eigen::VectorXd::Zero(2),
                                              Eigen::MatrixXd::Identity(2, 2));
        Eigen::MatrixXd x = sas_ec_sample(mv, rng, n);
        for (int j = 0; j < 2; ++j) {
            double var = x.col(j).squaredNorm() / static_cast<double>(n);
            CHECK(std::abs(var - 2.0) < 0.02);
        }
    }
    SUBCASE("alpha=1 marginal matches the cauchy cdf") {
        auto mv = MultivariateSas::elliptical(1.0, Eigen::VectorXd::Zero(2),
                                              Eigen::MatrixXd::Identity(2, 2));
        Eigen::MatrixXd x = sas_ec_sample(mv, rng, n);
        Eigen::VectorXd proj = x.col(0);
        for (double pt : {-1.0, 0.0, 1.0}) {
            double p = sas_cdf({1.0, 1.0, 0.0}, pt);
            double tol = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            CHECK(std::abs(empirical_cdf(proj, pt) - p) < tol);
        }
    }
    SUBCASE("projection median sits at the projected location") {
        Eigen::MatrixXd sig(2, 2);
        sig << 2.0, 0.5, 0.5, 1.0;
        Eigen::VectorXd th(2);
        th << 1.0, -2.0;
        auto mv = MultivariateSas::elliptical(1.3, th, sig);
        Eigen::MatrixXd x = sas_ec_sample(mv, rng, n);
        Eigen::VectorXd w(2);
        w << 0.3, -1.1;
        Eigen::VectorXd proj = x * w;
        std::vector<double> v(proj.data(), proj.data() + n);
        std::nth_element(v.begin(), v.begin() + n / 2, v.end());
        CHECK(std::abs(v[n / 2] - w.dot(th)) < 0.02);
    }
}

TEST_CASE("quadrature budget exhaustion is reported") {
    QuadratureOptions quad;
    quad.tol = 1e-15;
    quad.max_evals = 30;
    CHECK_THROWS_AS(sas_cdf_generic({1.5, 1.0, 0.0}, 0.7, quad), QuadratureError);
}
