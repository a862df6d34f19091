#include <Eigen/Eigenvalues>
#include <cmath>

#include "adrob/linalg.hpp"
#include "adrob/rng.hpp"
#include "doctest.h"

using namespace adrob;

namespace {

Eigen::VectorXd random_vec(Rng& rng, Eigen::Index d) {
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
    return v;
}

Eigen::MatrixXd random_psd(Rng& rng, Eigen::Index d) {
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
    return a * a.transpose();
}

}  // namespace

TEST_CASE("rank-2 eigen closed form, orthogonal case") {
    Eigen::Vector3d u(2, 0, 0), v(0, 1, 0);
    Rank2Eigen e = rank2_eigen(Rank2Gram(u, v));
    CHECK(e.lambda1 == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(e.lambda2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(std::abs(e.v1[0]) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(e.v2[1]) - 1.0) < 1e-14);
}

TEST_CASE("rank-2 eigenvalues a=b=1, c=1/2") {
    // realize a=b=1, c=1/2 with planar unit vectors at 60 degrees
    Eigen::Vector2d u(1, 0), v(0.5, std::sqrt(3.0) / 2.0);
    Rank2Eigen e = rank2_eigen(Rank2Gram(u, v));
    CHECK(e.lambda1 == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(e.lambda2 == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("rank-2 eigen matches a generic eigensolver on 1000 random instances") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.bits() % 19);
        Eigen::VectorXd u = random_vec(rng, d), v = random_vec(rng, d);
        Rank2Gram g(u, v);
        if (g.c * g.c >= g.a * g.b * (1.0 - 1e-9)) continue;
        Rank2Eigen e = rank2_eigen(g);
        Eigen::MatrixXd A = u * u.transpose() + v * v.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        const auto& ev = es.eigenvalues();
        CHECK(std::abs(e.lambda1 - ev[d - 1]) < 1e-10 * std::max(1.0, ev[d - 1]));
        CHECK(std::abs(e.lambda2 - ev[d - 2]) < 1e-10 * std::max(1.0, ev[d - 1]));
        // eigenpair residuals and orthonormality
        CHECK((A * e.v1 - e.lambda1 * e.v1).norm() < 1e-10 * e.lambda1);
        CHECK((A * e.v2 - e.lambda2 * e.v2).norm() < 1e-10 * std::max(1.0, e.lambda1));
        CHECK(std::abs(e.v1.dot(e.v2)) < 1e-10);
        CHECK(std::abs(e.v1.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("rank-2 eigen rejects near-parallel inputs") {
    Eigen::Vector2d u(1, 0), v(1, 1e-9);
    CHECK_THROWS_AS(rank2_eigen(Rank2Gram(u, v)), IllConditionedError);
}

TEST_CASE("eigenvector-denominator inequalities") {
    Rng rng(12);
    for (int trial = 0; trial < 10000; ++trial) {
        const double b = 0.1 + 2.0 * rng.uniform();
        const double s = 1.0 + 2.0 * rng.uniform();
        const double a = b * s * (1.0 + rng.uniform());
        const double c = (2.0 * rng.uniform() - 1.0) * std::sqrt(a * b) * 0.999;
        const double disc = std::sqrt((a - b) * (a - b) + 4.0 * c * c);
        const double l1 = 0.5 * (a + b + disc), l2 = 0.5 * (a + b - disc);
        const double den1 = (a * a - a * b + 2.0 * c * c) * l1 + (a - b) * (c * c - a * b);
        const double den2 = (b * b - a * b + 2.0 * c * c) * l2 + (b - a) * (c * c - a * b);
        CHECK(l1 / den1 <= 1.0 / ((a - b) * (a - b)) + 1e-12);
        CHECK(l2 / den2 <= 1.0 / ((a - b) * (a - b)) + 1e-12);
    }
}

TEST_CASE("zero-one bounds") {
    Rng rng(13);
    for (int trial = 0; trial < 10000; ++trial) {
        double x = rng.uniform(), y = rng.uniform();
        double mid = 1.0 - (1.0 - x) * (1.0 - y);
        CHECK(std::max(x, y) <= mid + 1e-15);
        CHECK(mid <= x + y + 1e-15);
    }
}

TEST_CASE("trace bound") {
    SUBCASE("diagonal example") {
        TraceBound tb = trace_bound_check(Eigen::MatrixXd::Identity(3, 3),
                                          Eigen::Vector3d(1, 2, 3).asDiagonal());
        CHECK(tb.lhs == doctest::Approx(6.0));
        CHECK(tb.rhs == doctest::Approx(9.0));
    }
    SUBCASE("randomized") {
        Rng rng(14);
        for (int trial = 0; trial < 10000; ++trial) {
            Eigen::MatrixXd P = random_psd(rng, 10);
            Eigen::MatrixXd B(10, 10);
            for (int i = 0; i < 10; ++i)
                for (int j = 0; j < 10; ++j) B(i, j) = rng.normal();
            TraceBound tb = trace_bound_check(P, B);
            CHECK(tb.lhs <= tb.rhs + 1e-9 * std::abs(tb.rhs));
        }
    }
}

TEST_CASE("spd solve") {
    SUBCASE("identity") {
        Eigen::Vector3d r(1, -2, 3);
        CHECK((spd_solve(Eigen::MatrixXd::Identity(3, 3), r) - r).norm() < 1e-14);
    }
    SUBCASE("diagonal") {
        Eigen::MatrixXd S = Eigen::Vector2d(2, 4).asDiagonal();
        Eigen::Vector2d rhs(2, 8);
        Eigen::VectorXd x = spd_solve(S, rhs);
        CHECK(x[0] == doctest::Approx(1.0));
        CHECK(x[1] == doctest::Approx(2.0));
    }
    SUBCASE("random spd residual") {
        Rng rng(15);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::MatrixXd S =
                random_psd(rng, 8) + 0.1 * Eigen::MatrixXd::Identity(8, 8);
            Eigen::VectorXd rhs = random_vec(rng, 8);
            Eigen::VectorXd x = spd_solve(S, rhs);
            CHECK((S * x - rhs).norm() <= 1e-10 * rhs.norm());
        }
    }
    SUBCASE("singular but consistent") {
        Eigen::MatrixXd S = Eigen::Vector2d(1, 0).asDiagonal();
        Eigen::Vector2d rhs(3, 0);
        CHECK((S * spd_solve(S, rhs) - rhs).norm() < 1e-12);
    }
    SUBCASE("inconsistent") {
        Eigen::MatrixXd S = Eigen::Vector2d(1, 0).asDiagonal();
        Eigen::Vector2d rhs(3, 1);
        CHECK_THROWS_AS(spd_solve(S, rhs), InconsistentSystemError);
    }
}

TEST_CASE("spd sqrt") {
    Eigen::MatrixXd S = Eigen::Vector2d(4, 9).asDiagonal();
    Eigen::MatrixXd M = spd_sqrt(S);
    CHECK(M(0, 0) == doctest::Approx(2.0));
    CHECK(M(1, 1) == doctest::Approx(3.0));
    Rng rng(16);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd P = random_psd(rng, 6);
        Eigen::MatrixXd R = spd_sqrt(P);
        CHECK((R * R - P).norm() <= 1e-10 * std::max(1.0, P.norm()));
        CHECK((R - R.transpose()).norm() < 1e-12 * std::max(1.0, R.norm()));
    }
}
