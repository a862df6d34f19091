#include "adrob/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace adrob {

Rank2Eigen rank2_eigen(const Rank2Gram& g) {
    const double a = g.a, b = g.b, c = g.c;
    if (c * c >= a * b * (1.0 - 1e-12))
        throw IllConditionedError("rank2_eigen: u and v are (nearly) parallel");
    if (c * c <= 1e-28 * a * b) {
        // orthogonal u, v: the closed-form eigenvector denominators vanish,
        // but the pair itself is the eigenbasis
        Eigen::VectorXd nu = g.u.normalized();
        Eigen::VectorXd nv = g.v.normalized();
        if (a >= b) return {a, b, std::move(nu), std::move(nv)};
        return {b, a, std::move(nv), std::move(nu)};
    }
    const double disc = std::sqrt((a - b) * (a - b) + 4.0 * c * c);
    const double l1 = 0.5 * (a + b + disc);
    const double l2 = 0.5 * (a + b - disc);

    const double den1 = (a * a - a * b + 2.0 * c * c) * l1 + (a - b) * (c * c - a * b);
    const double den2 = (b * b - a * b + 2.0 * c * c) * l2 + (b - a) * (c * c - a * b);

    Eigen::VectorXd v1 = ((l1 - b) * g.u + c * g.v) / std::sqrt(den1);
    Eigen::VectorXd v2 = (c * g.u + (l2 - a) * g.v) / std::sqrt(den2);
    // The closed-form denominators already give unit vectors; renormalize to
    // absorb rounding.
    v1.normalize();
    v2.normalize();
    return {l1, l2, std::move(v1), std::move(v2)};
}

Eigen::VectorXd spd_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& rhs) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd x = llt.solve(rhs);
        double res = (S * x - rhs).norm();
        if (res <= 1e-10 * std::max(1.0, rhs.norm())) return x;
    }
    // PSD-singular fallback: spectral pseudo-inverse with rank check.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    if (vals.minCoeff() < -1e-10 * std::max(1.0, vals.maxCoeff()))
        throw DomainError("spd_solve: matrix is not PSD");
    const double cutoff = 1e-12 * std::max(1.0, vals.maxCoeff());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i)
        if (vals[i] > cutoff) x += vecs.col(i) * (vecs.col(i).dot(rhs) / vals[i]);
    if ((S * x - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm()))
        throw InconsistentSystemError("spd_solve: rhs is not in range(S)");
    return x;
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const auto& vals = es.eigenvalues();
    if (vals.minCoeff() < -1e-10 * std::max(1.0, vals.maxCoeff()))
        throw DomainError("spd_sqrt: matrix is not PSD");
    Eigen::VectorXd root = vals.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

TraceBound trace_bound_check(const Eigen::MatrixXd& P, const Eigen::MatrixXd& B) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw DomainError("trace_bound_check: P must be PSD");
    const double lhs = (P * B).trace();
    const double rhs = P.trace() * B.jacobiSvd().singularValues()(0);
    return {lhs, rhs};
}

}  // namespace adrob
