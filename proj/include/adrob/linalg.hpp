#pragma once

#include <Eigen/Dense>

#include "adrob/errors.hpp"

namespace adrob {

/// Gram data of A = uu' + vv': a = ||u||^2, b = ||v||^2, c = <u, v>.
struct Rank2Gram {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double a;
    double b;
    double c;

    Rank2Gram(Eigen::VectorXd u_, Eigen::VectorXd v_)
        : u(std::move(u_)), v(std::move(v_)), a(u.squaredNorm()), b(v.squaredNorm()), c(u.dot(v)) {
        if (!(a > 0.0 && b > 0.0)) throw DomainError("Rank2Gram: u, v must be non-zero");
    }
};

struct Rank2Eigen {
    double lambda1;
    double lambda2;
    Eigen::VectorXd v1;
    Eigen::VectorXd v2;
};

/// Closed-form non-zero eigenpairs of uu' + vv':
///   lambda_{1,2} = (a + b +- sqrt((a-b)^2 + 4c^2)) / 2,
///   v1 ~ (lambda1 - b) u + c v,  v2 ~ c u + (lambda2 - a) v,
/// normalized by the explicit denominators and re-normalized to unit length.
/// Throws IllConditionedError when u and v are (nearly) parallel.
Rank2Eigen rank2_eigen(const Rank2Gram& g);

/// Solve S x = rhs for symmetric PSD S: Cholesky when definite, rank-checked
/// pseudo-inverse otherwise. Throws InconsistentSystemError when rhs is
/// outside the range of a singular S.
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& rhs);

/// Symmetric square root of a PSD matrix.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& S);

/// Both sides of Tr(PB) <= Tr(P) ||B||_2 (P PSD), for property testing.
struct TraceBound {
    double lhs;
    double rhs;
};
TraceBound trace_bound_check(const Eigen::MatrixXd& P, const Eigen::MatrixXd& B);

}  // namespace adrob
