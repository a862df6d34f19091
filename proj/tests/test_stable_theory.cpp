#include <cmath>

#include "adrob/gaussian.hpp"
#include "adrob/norms.hpp"
#include "adrob/rng.hpp"
#include "adrob/stable_theory.hpp"
#include "doctest.h"

using namespace adrob;

namespace {

SasMixture ic_mixture(double alpha, const Eigen::VectorXd& tp, const Eigen::VectorXd& tm,
                      double R) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(tp.size());
    return {MultivariateSas::independent(alpha, tp, ones),
            MultivariateSas::independent(alpha, tm, ones), R};
}

double robust_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& tb, double eps,
                        double q) {
    return w.dot(tb) - 2.0 * eps * lp_norm(w, q);
}

}  // namespace

TEST_CASE("ic standard classifier") {
    SUBCASE("l2 geometry") {
        Eigen::Vector2d tp(1.5, 2), tm(-1.5, -2);
        SasMixture mix = ic_mixture(2.0, tp, tm, 1.0);
        IcSolution sol = solve_ic_standard(mix);
        CHECK((sol.clf.w - Eigen::Vector2d(0.6, 0.8)).norm() < 1e-12);
        CHECK(sol.clf.b == doctest::Approx(0.0));
        CHECK(sol.value == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("isotropic gap gives the uniform direction") {
        Eigen::Vector3d tp(1, 1, 1), tm(-1, -1, -1);
        for (double alpha : {1.3, 1.7, 2.0}) {
            IcSolution sol = solve_ic_standard(ic_mixture(alpha, tp, tm, 1.0));
            CHECK((sol.clf.w - Eigen::Vector3d::Constant(sol.clf.w[0])).norm() < 1e-12);
        }
    }
    SUBCASE("achieved value is the dual norm") {
        Eigen::Vector2d tp(0.5, 1), tm(-0.5, -1);  // theta_bar = (1, 2)
        IcSolution sol = solve_ic_standard(ic_mixture(1.5, tp, tm, 1.0));
        CHECK(sol.value == doctest::Approx(std::cbrt(9.0)).epsilon(1e-12));
    }
    SUBCASE("holder optimality against random sphere directions") {
        Rng rng(31);
        Eigen::Vector3d tp(1, 0.4, -0.2), tm(-0.5, 0.1, 0.3);
        SasMixture mix = ic_mixture(1.6, tp, tm, 1.0);
        IcSolution sol = solve_ic_standard(mix);
        const Eigen::VectorXd tb = mix.mean_gap();
        for (int trial = 0; trial < 500; ++trial) {
            Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
            w /= lp_norm(w, 1.6);
            CHECK(w.dot(tb) <= sol.value + 1e-9);
        }
    }
    SUBCASE("alpha <= 1 is rejected") {
        Eigen::Vector2d tp(1, 0), tm(-1, 0);
        CHECK_THROWS_AS(solve_ic_standard(ic_mixture(1.0, tp, tm, 1.0)), DomainError);
    }
}

TEST_CASE("ic robust classifier") {
    SUBCASE("q = alpha: penalty constant on the sphere, same value") {
        Eigen::Vector3d tp(1, 0.3, -0.4), tm(-0.2, 0.1, 0.5);
        SasMixture mix = ic_mixture(1.5, tp, tm, 1.0);
        PerturbSpec pert;
        pert.p = 3.0;  // q = 1.5 = alpha
        pert.epsilon = 0.1;
        IcSolution rob = solve_ic_robust(mix, pert);
        IcSolution std_sol = solve_ic_standard(mix);
        CHECK(std::abs((rob.value + 2.0 * pert.epsilon) - std_sol.value) < 1e-7);
        LossReport a = ic_classwise_losses(mix, rob.clf);
        LossReport b = ic_classwise_losses(mix, std_sol.clf);
        CHECK(std::abs(a.loss_plus - b.loss_plus) < 1e-7);
        CHECK(std::abs(a.loss_minus - b.loss_minus) < 1e-7);
    }
    SUBCASE("isotropic gap: uniform direction, same loss as standard") {
        Eigen::Vector3d tp(1, 1, 1), tm(-1, -1, -1);
        SasMixture mix = ic_mixture(1.4, tp, tm, 1.0);
        PerturbSpec pert;
        pert.p = 2.0;
        pert.epsilon = 0.4;  // < ||tb||_inf / 2 = 1
        IcSolution rob = solve_ic_robust(mix, pert);
        IcSolution std_sol = solve_ic_standard(mix);
        CHECK((rob.clf.w - std_sol.clf.w).cwiseAbs().maxCoeff() < 1e-6);
        LossReport a = ic_classwise_losses(mix, rob.clf);
        LossReport b = ic_classwise_losses(mix, std_sol.clf);
        CHECK(std::abs(a.loss_plus - b.loss_plus) < 1e-7);
    }
    SUBCASE("degrade regime: strictly smaller margin, grid-search oracle") {
        Eigen::Vector3d tp(1, 0.2, 0.05), tm(0, 0, 0);
        SasMixture mix = ic_mixture(1.8, tp, tm, 1.0);
        PerturbSpec pert;
        pert.p = 1.5;  // q = 3
        pert.epsilon = 0.1;
        IcSolution rob = solve_ic_robust(mix, pert);
        IcSolution std_sol = solve_ic_standard(mix);
        const Eigen::VectorXd tb = mix.mean_gap();
        CHECK(rob.clf.w.dot(tb) < std_sol.value - 1e-9);
        // dense grid over the alpha-sphere octant fan as an oracle
        double best = -1e300;
        const int g = 60;
        for (int i = 0; i <= g; ++i)
            for (int j = 0; j <= g; ++j) {
                Eigen::Vector3d w(1.0, 2.0 * i / g - 1.0, 2.0 * j / g - 1.0);
                w /= lp_norm(w, 1.8);
                best = std::max(best, robust_objective(w, tb, pert.epsilon, 3.0));
            }
        CHECK(rob.value >= best - 1e-4);  // grid is coarse; solver must win
        // local optimality
        Rng rng(32);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::Vector3d w = rob.clf.w;
            for (int k = 0; k < 3; ++k) w[k] += 1e-4 * rng.normal();
            w /= lp_norm(w, 1.8);
            CHECK(robust_objective(w, tb, pert.epsilon, 3.0) <= rob.value + 1e-7);
        }
    }
}

TEST_CASE("ic classwise losses") {
    SUBCASE("balanced optimum: both classes Phi_alpha(-value/2)") {
        Eigen::Vector2d tp(0.8, 0.6), tm(-0.8, -0.6);
        SasMixture mix = ic_mixture(1.5, tp, tm, 1.0);
        IcSolution sol = solve_ic_standard(mix);
        LossReport rep = ic_classwise_losses(mix, sol.clf);
        double expected = sas_cdf({1.5, 1.0, 0.0}, -0.5 * sol.value);
        CHECK(rep.loss_plus == doctest::Approx(expected).epsilon(1e-9));
        CHECK(rep.loss_minus == doctest::Approx(expected).epsilon(1e-9));
    }
    SUBCASE("zero margin gives half") {
        Eigen::Vector2d tp(1, 1), tm(1, -1);  // theta_bar along e2
        SasMixture mix = ic_mixture(1.5, tp, tm, 1.0);
        LinearClassifier clf{Eigen::Vector2d(1, 0), -1.0};  // w'th+ = w'th- = 1
        LossReport rep = ic_classwise_losses(mix, clf);
        CHECK(rep.loss_plus == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(rep.loss_minus == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("cauchy intercept analysis") {
    Eigen::Vector2d tp(1.0, 0.3), tm(-1.0, -0.3);  // gap peak 2 at coord 0
    PerturbSpec pert;
    pert.p = kInf;
    SUBCASE("quadratic coefficients reproduce the closed-form discriminants") {
        pert.epsilon = 0.3;
        CauchyAnalysis an = cauchy_analysis(ic_mixture(1.0, tp, tm, 3.0), pert);
        CHECK(an.quads.q1.quarter_discriminant() ==
              doctest::Approx(an.quads.delta1).epsilon(1e-10));
        CHECK(an.quads.q2.quarter_discriminant() ==
              doctest::Approx(an.quads.delta2).epsilon(1e-10));
        CHECK(an.quads.delta1 == doctest::Approx(3.0 * 4.0 - 4.0));  // R gap^2 - (R-1)^2
    }
    SUBCASE("epsilon = 0 collapses robust onto standard") {
        pert.epsilon = 0.0;
        CauchyAnalysis an = cauchy_analysis(ic_mixture(1.0, tp, tm, 3.0), pert);
        CHECK(an.quads.d_eps == doctest::Approx(an.quads.d_zero).epsilon(1e-12));
        CHECK(an.rob_losses.loss_plus ==
              doctest::Approx(an.std_losses.loss_plus).epsilon(1e-12));
        CHECK(*an.quads.b_rob == doctest::Approx(*an.quads.b_std).epsilon(1e-12));
    }
    SUBCASE("sign identity: sgn(dl/db) = sgn(q1(b))") {
        pert.epsilon = 0.0;
        const double R = 3.0;
        SasMixture mix = ic_mixture(1.0, tp, tm, R);
        CauchyAnalysis an = cauchy_analysis(mix, pert);
        auto loss_at = [&](double b) {
            LinearClassifier clf{an.w.w, b};
            LossReport rep = ic_classwise_losses(mix, clf);
            return rep.overall();
        };
        for (double b = -6.0; b <= 6.0; b += 0.37) {
            const double h = 1e-6;
            double deriv = (loss_at(b + h) - loss_at(b - h)) / (2.0 * h);
            if (std::abs(an.quads.q1.eval(b)) < 1e-3) continue;  // too close to a root
            CHECK((deriv > 0) == (an.quads.q1.eval(b) > 0));
        }
    }
    SUBCASE("optimal intercept is a minimizer") {
        pert.epsilon = 0.25;
        SasMixture mix = ic_mixture(1.0, tp, tm, 2.0);
        CauchyAnalysis an = cauchy_analysis(mix, pert);
        REQUIRE(an.quads.b_std.has_value());
        auto loss_at = [&](double b) {
            LinearClassifier clf{an.w.w, b};
            return ic_classwise_losses(mix, clf).overall();
        };
        const double b0 = *an.quads.b_std;
        CHECK(loss_at(b0) <= loss_at(b0 + 0.05) + 1e-12);
        CHECK(loss_at(b0) <= loss_at(b0 - 0.05) + 1e-12);
        // closed-form losses match the evaluator at the optimal intercept
        LinearClassifier opt{an.w.w, b0};
        LossReport rep = ic_classwise_losses(mix, opt);
        CHECK(rep.loss_plus == doctest::Approx(an.std_losses.loss_plus).epsilon(1e-9));
        CHECK(rep.loss_minus == doctest::Approx(an.std_losses.loss_minus).epsilon(1e-9));
    }
    SUBCASE("collapse regime") {
        pert.epsilon = 0.3;
        const double R = 2.0 + 4.0 * 4.0 + 1.0;  // beyond 2 + 4 gap^2
        SasMixture mix = ic_mixture(1.0, tp, tm, R);
        CauchyAnalysis an = cauchy_analysis(mix, pert);
        CHECK(an.quads.collapse_guaranteed);
        CHECK(an.quads.delta1 < 0.0);
        CHECK(an.quads.delta2 < 0.0);
        CHECK(!an.quads.b_std.has_value());
        CHECK(!an.quads.b_rob.has_value());
        CHECK(an.std_losses.loss_minus == 0.0);
        CHECK(an.std_losses.loss_plus == 1.0);
        CHECK(an.std_losses.ad() == doctest::Approx(an.rob_losses.ad()));
        // loss strictly decreasing towards b -> -infinity
        auto loss_at = [&](double b) {
            LinearClassifier clf{an.w.w, b};
            return ic_classwise_losses(mix, clf).overall();
        };
        double prev = loss_at(1.0);
        for (double b : {-1.0, -10.0, -100.0, -10000.0, -1000000.0}) {
            double cur = loss_at(b);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    SUBCASE("disparity reduction region") {
        Eigen::Vector2d big_tp(6.0, 0.5), big_tm(-6.0, -0.5);  // gap 12
        const double R = 3.0;
        pert.kappa = 0.5;
        // condition: gap^2 = 144 > (R+1)^2 / (R (1-kappa)^2) = 16/0.75
        const double eps_max = 0.5 * pert.kappa * 12.0;
        double prev_d = -1.0;
        for (double eps = 0.0; eps <= eps_max; eps += eps_max / 8.0) {
            pert.epsilon = eps;
            CauchyAnalysis an = cauchy_analysis(ic_mixture(1.0, big_tp, big_tm, R), pert);
            CHECK(an.quads.reduce_condition);
            if (eps > 0.0) {
                // the minority loss reads Phi_1((gap - d)/(R-1)), the majority
                // loss Phi_1((-R gap + d)/(R-1)), so growing d shifts error
                // toward the majority class and shrinks the disparity
                CHECK(an.quads.d_eps > an.quads.d_zero);
                CHECK(an.rob_losses.ad() < an.std_losses.ad());
                if (prev_d >= 0.0) CHECK(an.quads.d_eps > prev_d);  // d'(s) > 0
            }
            prev_d = an.quads.d_eps;
        }
    }
    SUBCASE("balanced guard avoids the R-1 division") {
        pert.epsilon = 0.2;
        CauchyAnalysis an = cauchy_analysis(ic_mixture(1.0, tp, tm, 1.0), pert);
        CHECK(an.balanced);
        CHECK(an.std_losses.loss_plus == doctest::Approx(an.std_losses.loss_minus));
    }
}

TEST_CASE("elliptically contoured losses") {
    SUBCASE("alpha=2 matches the gaussian module with doubled variance") {
        Eigen::Vector2d tp(1, 0.5), tm(-1, -0.5);
        Eigen::MatrixXd sig(2, 2);
        sig << 1.5, 0.3, 0.3, 0.8;
        SasMixture mix{MultivariateSas::elliptical(2.0, tp, sig),
                       MultivariateSas::elliptical(2.0, tm, sig), 2.0};
        LinearClassifier clf{Eigen::Vector2d(0.7, -0.2), 0.1};
        PerturbSpec pert;
        pert.epsilon = 0.15;
        LossReport ec = ec_classwise_losses(mix, clf, &pert);
        GaussianMixture gm(tp, tm, 2.0 * sig, 2.0);  // SaS(2, c) = N(mu, 2c^2)
        LossReport ga = losses_for_classifier(gm, clf, &pert);
        CHECK(ec.loss_plus == doctest::Approx(ga.loss_plus).epsilon(1e-9));
        CHECK(ec.loss_minus == doctest::Approx(ga.loss_minus).epsilon(1e-9));
    }
    SUBCASE("ec and ic scales differ for alpha < 2") {
        Eigen::Vector2d tp(1, 1), tm(-1, -1);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
        SasMixture ec{MultivariateSas::elliptical(1.5, tp, Eigen::MatrixXd::Identity(2, 2)),
                      MultivariateSas::elliptical(1.5, tm, Eigen::MatrixXd::Identity(2, 2)),
                      1.0};
        SasMixture ic = ic_mixture(1.5, tp, tm, 1.0);
        LinearClassifier clf{Eigen::Vector2d(1, 1), 0.0};
        LossReport a = ec_classwise_losses(ec, clf);
        LossReport b = ic_classwise_losses(ic, clf);
        CHECK(std::abs(a.loss_plus - b.loss_plus) > 1e-4);  // sqrt(2) vs 2^{1/1.5}
    }
    SUBCASE("non-parallel robust direction strictly hurts both classes") {
        Eigen::Vector2d tp(1.2, 0.2), tm(-1.2, -0.2);
        Eigen::MatrixXd sig(2, 2);
        sig << 2.0, 0.0, 0.0, 0.5;
        SasMixture mix{MultivariateSas::elliptical(1.5, tp, sig),
                       MultivariateSas::elliptical(1.5, tm, sig), 1.0};
        // EC theory mirrors the Gaussian KKT system through the shape matrix
        GaussianMixture gm(tp, tm, sig, 1.0);
        PerturbSpec pert;
        pert.p = kInf;
        pert.epsilon = 0.25;
        auto [u, std_clf] = solve_standard(gm);
        auto [v, rob_clf] = solve_robust(gm, pert);
        std_clf.b = -0.5 * std_clf.w.dot(tp + tm);
        rob_clf.b = -0.5 * rob_clf.w.dot(tp + tm);
        LossReport s = ec_classwise_losses(mix, std_clf);
        LossReport r = ec_classwise_losses(mix, rob_clf);
        CHECK(r.loss_plus > s.loss_plus);
        CHECK(r.loss_minus > s.loss_minus);
    }
}
