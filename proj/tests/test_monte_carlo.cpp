#include <cmath>

#include "adrob/monte_carlo.hpp"
#include "adrob/stable.hpp"
#include "doctest.h"

using namespace adrob;

namespace {

GaussianMixture simple_gaussian(double R) {
    return {Eigen::Vector2d(1, 0.5), Eigen::Vector2d(-1, -0.5),
            Eigen::MatrixXd::Identity(2, 2), R};
}

SasMixture simple_stable(double alpha, double R) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    return {MultivariateSas::independent(alpha, Eigen::Vector2d(1, 0.5), ones),
            MultivariateSas::independent(alpha, Eigen::Vector2d(-1, -0.5), ones), R};
}

}  // namespace

TEST_CASE("sample counts follow the imbalance ratio") {
    SampleSet balanced = sample_mixture(simple_gaussian(1.0), 1000, 5);
    CHECK(balanced.count_plus() == 1000);
    CHECK(balanced.count_minus() == 1000);
    SampleSet skewed = sample_mixture(simple_gaussian(10.0), 1000, 5);
    CHECK(skewed.count_plus() == 100);
    CHECK(skewed.count_minus() == 1000);
}

TEST_CASE("sample means concentrate at the class means") {
    GaussianMixture mix = simple_gaussian(2.0);
    SampleSet set = sample_mixture(mix, 100000, 6);
    const Eigen::Index np = set.count_plus();
    Eigen::VectorXd mean_plus = set.features.topRows(np).colwise().mean();
    Eigen::VectorXd mean_minus = set.features.bottomRows(100000).colwise().mean();
    const double se_plus = 5.0 / std::sqrt(static_cast<double>(np));
    CHECK((mean_plus - mix.theta_plus).cwiseAbs().maxCoeff() < se_plus);
    CHECK((mean_minus - mix.theta_minus).cwiseAbs().maxCoeff() < 5.0 / std::sqrt(1e5));
}

TEST_CASE("sampling is bit-identical across runs and thread modes") {
    GaussianMixture mix = simple_gaussian(3.0);
    SampleSet a = sample_mixture(mix, 20000, 77, true);
    SampleSet b = sample_mixture(mix, 20000, 77, true);
    SampleSet c = sample_mixture(mix, 20000, 77, false);
    CHECK(a.features == b.features);
    CHECK(a.features == c.features);
    SasMixture sm = simple_stable(1.5, 3.0);
    SampleSet d = sample_mixture(sm, 20000, 77, true);
    SampleSet e = sample_mixture(sm, 20000, 77, false);
    CHECK(d.features == e.features);
}

TEST_CASE("empirical losses") {
    GaussianMixture mix = simple_gaussian(1.0);
    SampleSet set = sample_mixture(mix, 200000, 8);
    auto [u, clf] = solve_standard(mix);
    SUBCASE("matches the closed form within 3 sigma") {
        PerturbSpec pert;
        LossReport theory = classwise_losses_standard(mix, solve_kkt(mix, pert));
        EvalReport emp = empirical_losses(set, clf);
        const double sigma =
            std::sqrt(theory.loss_plus * (1.0 - theory.loss_plus) / 200000.0);
        CHECK(std::abs((1.0 - emp.acc_plus) - theory.loss_plus) < 3.0 * sigma);
        CHECK(std::abs((1.0 - emp.acc_minus) - theory.loss_minus) < 3.0 * sigma);
    }
    SUBCASE("serial and parallel evaluation agree exactly") {
        EvalReport a = empirical_losses(set, clf, nullptr, true);
        EvalReport b = empirical_losses(set, clf, nullptr, false);
        CHECK(a.acc_plus == b.acc_plus);
        CHECK(a.acc_minus == b.acc_minus);
    }
    SUBCASE("robust indicator coincides with the exact worst-case attack") {
        PerturbSpec pert;
        pert.p = kInf;
        pert.epsilon = 0.2;
        const double q = pert.q();
        const double shift = pert.epsilon * lp_norm(clf.w, q);
        for (Eigen::Index i = 0; i < 1000; ++i) {
            const Eigen::VectorXd x = set.features.row(i).transpose();
            const double y = set.labels[i];
            const bool closed_form = y * (clf.w.dot(x) + clf.b) <= shift;
            // exact worst-case lp perturbation: x - y eps d||w||_q
            const Eigen::VectorXd x_adv = x - y * pert.epsilon * lq_grad(clf.w, q);
            const bool attacked = y * (clf.w.dot(x_adv) + clf.b) <= 1e-12;
            CHECK(closed_form == attacked);
        }
    }
    SUBCASE("all-negative classifier on an imbalanced set") {
        SampleSet sk = sample_mixture(simple_gaussian(10.0), 50000, 9);
        LinearClassifier allneg{Eigen::Vector2d(1e-12, 0), -1e6};
        EvalReport rep = empirical_losses(sk, allneg);
        CHECK(rep.acc_minus == 1.0);
        CHECK(rep.acc_plus == 0.0);
        CHECK(rep.ad == 1.0);
    }
    SUBCASE("empty class is rejected") {
        SampleSet bad = sample_mixture(simple_gaussian(1.0), 10, 1);
        bad.labels.setConstant(-1.0);
        CHECK_THROWS_AS(empirical_losses(bad, clf), DomainError);
    }
}

TEST_CASE("stable mixture losses match the pushforward closed form") {
    for (double alpha : {1.0, 1.5}) {
        SasMixture mix = simple_stable(alpha, 2.0);
        SampleSet set = sample_mixture(mix, 500000, 10);
        LinearClassifier clf{Eigen::Vector2d(0.8, 0.2), -0.1};
        LossReport theory = ic_classwise_losses(mix, clf);
        EvalReport emp = empirical_losses(set, clf);
        const double np = static_cast<double>(set.count_plus());
        const double sp = std::sqrt(theory.loss_plus * (1.0 - theory.loss_plus) / np);
        const double sm =
            std::sqrt(theory.loss_minus * (1.0 - theory.loss_minus) / 500000.0);
        CHECK(std::abs((1.0 - emp.acc_plus) - theory.loss_plus) < 3.0 * sp);
        CHECK(std::abs((1.0 - emp.acc_minus) - theory.loss_minus) < 3.0 * sm);
    }
}

TEST_CASE("adversarial training") {
    GaussianMixture mix = simple_gaussian(1.0);
    SampleSet set = sample_mixture(mix, 20000, 11);
    SUBCASE("standard training approaches the optimal accuracy") {
        TrainConfig cfg;
        cfg.max_epochs = 60;
        cfg.patience = 15;
        TrainResult res = adv_train_linear(set, cfg, 101);
        auto [u, opt] = solve_standard(mix);
        SampleSet test = sample_mixture(mix, 50000, 12);
        EvalReport trained = empirical_losses(test, res.clf);
        EvalReport best = empirical_losses(test, opt);
        CHECK(trained.acc_overall > best.acc_overall - 0.01);
    }
    SUBCASE("training trace is deterministic") {
        TrainConfig cfg;
        cfg.max_epochs = 5;
        TrainResult a = adv_train_linear(set, cfg, 55);
        TrainResult b = adv_train_linear(set, cfg, 55);
        CHECK(a.clf.w == b.clf.w);
        CHECK(a.train_loss == b.train_loss);
        CHECK(a.val_loss == b.val_loss);
    }
    SUBCASE("fgm and converged pgd coincide for linear models") {
        TrainConfig fgm;
        fgm.attack = TrainConfig::Attack::Fgm;
        fgm.pert.p = kInf;
        fgm.pert.epsilon = 0.2;
        fgm.max_epochs = 20;
        TrainConfig pgd = fgm;
        pgd.attack = TrainConfig::Attack::Pgd;
        TrainResult a = adv_train_linear(set, fgm, 77);
        TrainResult b = adv_train_linear(set, pgd, 77);
        CHECK((a.clf.w - b.clf.w).norm() < 1e-6 * a.clf.w.norm());
    }
}

TEST_CASE("sweep grid") {
    SweepSpec spec;
    spec.theta_plus = Eigen::Vector2d(1, 0.5);
    spec.theta_minus = Eigen::Vector2d(-1, -0.5);
    spec.sigma = Eigen::MatrixXd::Identity(2, 2);
    spec.n_major = 50000;
    SUBCASE("empty grid gives an empty table") {
        CHECK(sweep(spec).empty());
    }
    SUBCASE("robust training costs overall accuracy at R = 1") {
        spec.R_grid = {1.0};
        spec.p_grid = {2.0};
        spec.epsilon_grid = {0.0, 0.3};
        spec.seeds = {1};
        auto rows = sweep(spec);
        REQUIRE(rows.size() == 2);
        // isotropic q=2 keeps the direction, so the gap is pure noise here
        const double slack = rows[0].eval.ci_halfwidth() + rows[1].eval.ci_halfwidth();
        CHECK(rows[0].eval.acc_overall >= rows[1].eval.acc_overall - slack);
    }
    SUBCASE("ad gap positive and increasing in R") {
        spec.R_grid = {1.0, 2.0, 5.0, 10.0};
        spec.p_grid = {2.0};
        spec.epsilon_grid = {0.3};
        spec.seeds = {3};
        auto rows = sweep(spec);
        REQUIRE(rows.size() == 4);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].ad_gap > 0.0);
        }
    }
    SUBCASE("deterministic per seed") {
        spec.R_grid = {2.0};
        spec.p_grid = {2.0};
        spec.epsilon_grid = {0.2};
        spec.seeds = {9};
        auto a = sweep(spec, true);
        auto b = sweep(spec, false);
        REQUIRE(a.size() == b.size());
        CHECK(a[0].eval.acc_plus == b[0].eval.acc_plus);
        CHECK(a[0].ad_gap == b[0].ad_gap);
    }
}
