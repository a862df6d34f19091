#include "adrob/ridge.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "adrob/linalg.hpp"

namespace adrob {

RidgeScenario::RidgeScenario(Eigen::VectorXd ma, Eigen::VectorXd mb, double count1,
                             double count2, double lp, Eigen::VectorXd bs,
                             Eigen::MatrixXd sigma)
    : mu1(std::move(ma)),
      mu2(std::move(mb)),
      k1(count1),
      k2(count2),
      lambda_prime(lp),
      beta_star(std::move(bs)),
      sigma_pop(std::move(sigma)) {
    const Eigen::Index d = mu1.size();
    if (mu2.size() != d || beta_star.size() != d)
        throw DomainError("RidgeScenario: dimension mismatch");
    if (!(k1 >= k2 && k2 >= 1.0)) throw DomainError("RidgeScenario: requires k1 >= k2 >= 1");
    if (!(lambda_prime > 0.0)) throw DomainError("RidgeScenario: lambda' must be positive");
    if (sigma_pop.size() == 0) sigma_pop = Eigen::MatrixXd::Zero(d, d);
    if (sigma_pop.rows() != d || sigma_pop.cols() != d)
        throw DomainError("RidgeScenario: covariance dimension mismatch");
}

Eigen::MatrixXd RidgeScenario::ideal_gram() const {
    return k1 * mu1 * mu1.transpose() + k2 * mu2 * mu2.transpose();
}

Eigen::VectorXd ridge_estimate(const Eigen::MatrixXd& gram, double lambda_prime,
                               const Eigen::VectorXd& beta_star) {
    if (!(lambda_prime > 0.0)) throw DomainError("ridge_estimate: lambda' must be positive");
    Eigen::MatrixXd A = gram;
    A.diagonal().array() += lambda_prime;
    return A.llt().solve(gram * beta_star);
}

GroupLosses population_group_loss(const RidgeScenario& sc, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd d = beta - sc.beta_star;
    GroupLosses out;
    out.common = 0.5 * d.dot(sc.sigma_pop * d);
    out.term1 = std::abs(sc.mu1.dot(d));
    out.term2 = std::abs(sc.mu2.dot(d));
    out.loss1 = out.common + 0.5 * out.term1 * out.term1;
    out.loss2 = out.common + 0.5 * out.term2 * out.term2;
    return out;
}

ToyDisparity toy_orthogonal_disparity(const RidgeScenario& sc) {
    if (std::abs(sc.mean_inner()) > 1e-12)
        throw DomainError(
            "toy_orthogonal_disparity: means not orthogonal; use general_gram_disparity");
    ToyDisparity out;
    out.term1 = sc.lambda_prime * std::abs(sc.m1()) / (sc.k1 * sc.n1() + sc.lambda_prime);
    out.term2 = sc.lambda_prime * std::abs(sc.m2()) / (sc.k2 * sc.n2() + sc.lambda_prime);
    return out;
}

namespace {

// g_i(S) = mu_i' ((S + l'I)^{-1} S - I) beta* = -l' mu_i' (S + l'I)^{-1} beta*.
double g_dense(const Eigen::VectorXd& mu, const Eigen::MatrixXd& S, double lp,
               const Eigen::VectorXd& beta_star) {
    Eigen::MatrixXd A = S;
    A.diagonal().array() += lp;
    return -lp * mu.dot(A.llt().solve(beta_star));
}

}  // namespace

DisparityReport general_gram_disparity(const RidgeScenario& sc, const Eigen::MatrixXd& S) {
    DisparityReport rep;
    const double lp = sc.lambda_prime;
    rep.g1_dense = g_dense(sc.mu1, S, lp, sc.beta_star);
    rep.g2_dense = g_dense(sc.mu2, S, lp, sc.beta_star);

    // Spectral path through the weighted rank-2 decomposition
    // S = uu' + vv', u = sqrt(k1) mu1, v = sqrt(k2) mu2.
    const Eigen::VectorXd u = std::sqrt(sc.k1) * sc.mu1;
    const Eigen::VectorXd v = std::sqrt(sc.k2) * sc.mu2;
    Rank2Eigen eig = rank2_eigen(Rank2Gram(u, v));
    auto g_spectral = [&](const Eigen::VectorXd& mu) {
        // (S + l'I)^{-1} x = x/l' + sum_i (1/(li+l') - 1/l') <vi,x> vi
        double acc = mu.dot(sc.beta_star) / lp;
        acc += (1.0 / (eig.lambda1 + lp) - 1.0 / lp) * eig.v1.dot(mu) *
               eig.v1.dot(sc.beta_star);
        acc += (1.0 / (eig.lambda2 + lp) - 1.0 / lp) * eig.v2.dot(mu) *
               eig.v2.dot(sc.beta_star);
        return -lp * acc;
    };
    rep.g1 = g_spectral(sc.mu1);
    rep.g2 = g_spectral(sc.mu2);

    const double n = sc.mean_inner();
    rep.envelope1 = 1.0 / sc.k1 + (sc.k2 * n * n + std::abs(n)) / sc.k1;
    rep.envelope2 = 1.0 / sc.k2 - sc.k2 * n * n / sc.k1 - std::abs(n) / sc.k2;
    rep.g1_within_envelope = std::abs(rep.g1) <= rep.envelope1;
    rep.g2_above_envelope = std::abs(rep.g2) >= rep.envelope2;
    return rep;
}

TaylorReport taylor_first_order(const RidgeScenario& sc, const Eigen::MatrixXd& S,
                                const Eigen::MatrixXd& S_prime) {
    const double lp = sc.lambda_prime;
    Eigen::MatrixXd A = S;
    A.diagonal().array() += lp;
    const Eigen::MatrixXd P = A.llt().solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
    TaylorReport rep;
    const Eigen::VectorXd Pb = P * sc.beta_star;
    rep.M1 = lp * (P * sc.mu1) * Pb.transpose();
    rep.M2 = lp * (P * sc.mu2) * Pb.transpose();
    const Eigen::MatrixXd D = S_prime - S;
    rep.g_tilde_1 = g_dense(sc.mu1, S, lp, sc.beta_star) + rep.M1.cwiseProduct(D).sum();
    rep.g_tilde_2 = g_dense(sc.mu2, S, lp, sc.beta_star) + rep.M2.cwiseProduct(D).sum();
    return rep;
}

GramPair sample_gram(const RidgeScenario& sc, double sigma2, Rng& rng) {
    if (!(sigma2 >= 0.0)) throw DomainError("sample_gram: sigma2 must be >= 0");
    const Eigen::Index d = sc.mu1.size();
    const auto rows1 = static_cast<Eigen::Index>(std::llround(sc.k1));
    const auto rows2 = static_cast<Eigen::Index>(std::llround(sc.k2));
    const double sd = std::sqrt(sigma2);

    GramPair gp;
    gp.S = sc.ideal_gram();
    gp.eps_sum = Eigen::VectorXd::Zero(d);
    gp.delta_sum = Eigen::VectorXd::Zero(d);
    gp.Q = Eigen::MatrixXd::Zero(d, d);
    gp.S_prime = Eigen::MatrixXd::Zero(d, d);
    auto add_rows = [&](const Eigen::VectorXd& mu, Eigen::Index count,
                        Eigen::VectorXd& noise_sum) {
        for (Eigen::Index i = 0; i < count; ++i) {
            Eigen::VectorXd e(d);
            for (Eigen::Index j = 0; j < d; ++j) e[j] = sd * rng.normal();
            Eigen::VectorXd y = mu + e;
            gp.S_prime += y * y.transpose();
            gp.Q += e * e.transpose();
            noise_sum += e;
        }
    };
    add_rows(sc.mu1, rows1, gp.eps_sum);
    add_rows(sc.mu2, rows2, gp.delta_sum);
    return gp;
}

}  // namespace adrob
