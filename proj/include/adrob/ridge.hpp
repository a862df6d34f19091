#pragma once

#include <Eigen/Dense>

#include "adrob/errors.hpp"
#include "adrob/rng.hpp"

namespace adrob {

/// Two-group ridge setting: k_i copies of mean mu_i, regularizer
/// lambda' = 2 N lambda, ground truth beta_star, and a per-group
/// population covariance for loss evaluation.
struct RidgeScenario {
    Eigen::VectorXd mu1;
    Eigen::VectorXd mu2;
    double k1 = 1.0;
    double k2 = 1.0;
    double lambda_prime = 1.0;
    Eigen::VectorXd beta_star;
    Eigen::MatrixXd sigma_pop;  // defaults to zero when empty

    RidgeScenario(Eigen::VectorXd m1, Eigen::VectorXd m2, double count1, double count2,
                  double lp, Eigen::VectorXd bs, Eigen::MatrixXd sigma = {});

    double n1() const { return mu1.squaredNorm(); }
    double n2() const { return mu2.squaredNorm(); }
    // the paper overloads "n" for this inner product; named explicitly here
    double mean_inner() const { return mu1.dot(mu2); }
    double m1() const { return mu1.dot(beta_star); }
    double m2() const { return mu2.dot(beta_star); }

    // S = k1 mu1 mu1' + k2 mu2 mu2', the means-only gram matrix.
    Eigen::MatrixXd ideal_gram() const;
};

/// beta_hat = (S + lambda' I)^{-1} S beta_star.
Eigen::VectorXd ridge_estimate(const Eigen::MatrixXd& gram, double lambda_prime,
                               const Eigen::VectorXd& beta_star);

/// l_i(beta) = (1/2)(beta-beta*)' Sigma (beta-beta*) + (1/2)<mu_i, beta-beta*>^2.
struct GroupLosses {
    double loss1 = 0.0;
    double loss2 = 0.0;
    double common = 0.0;  // shared covariance quadratic
    double term1 = 0.0;   // |<mu_1, beta - beta*>|
    double term2 = 0.0;   // |<mu_2, beta - beta*>|
};
GroupLosses population_group_loss(const RidgeScenario& sc, const Eigen::VectorXd& beta);

/// Closed-form disparity terms lambda' |m_i| / (k_i n_i + lambda') for
/// exactly orthogonal means.
struct ToyDisparity {
    double term1 = 0.0;
    double term2 = 0.0;
};
ToyDisparity toy_orthogonal_disparity(const RidgeScenario& sc);

/// g_i(S) = mu_i' ((S + lambda' I)^{-1} S - I) beta*, computed both through
/// the rank-2 spectral decomposition and a dense solve, with the scaling
/// envelopes (unit constants, diagnostic only).
struct DisparityReport {
    double g1 = 0.0;
    double g2 = 0.0;
    double g1_dense = 0.0;
    double g2_dense = 0.0;
    double envelope1 = 0.0;       // 1/k1 + (k2 n^2 + n)/k1
    double envelope2 = 0.0;       // 1/k2 - k2 n^2/k1 - n/k2
    bool g1_within_envelope = false;  // |g1| <= envelope1
    bool g2_above_envelope = false;   // |g2| >= envelope2
};
DisparityReport general_gram_disparity(const RidgeScenario& sc, const Eigen::MatrixXd& S);

/// First-order Taylor data at S: M_i = lambda' P mu_i beta*' P with
/// P = (S + lambda' I)^{-1}, and g~_i(S') = g_i(S) + <M_i, S'-S>_F.
struct TaylorReport {
    Eigen::MatrixXd M1;
    Eigen::MatrixXd M2;
    double g_tilde_1 = 0.0;
    double g_tilde_2 = 0.0;
};
TaylorReport taylor_first_order(const RidgeScenario& sc, const Eigen::MatrixXd& S,
                                const Eigen::MatrixXd& S_prime);

/// Ideal and sampled gram matrices with the noise decomposition
/// S' - S = eps_sum mu1' + mu1 eps_sum' + delta_sum mu2' + mu2 delta_sum' + Q.
struct GramPair {
    Eigen::MatrixXd S;
    Eigen::MatrixXd S_prime;
    Eigen::VectorXd eps_sum;    // sum of class-1 noise rows
    Eigen::VectorXd delta_sum;  // sum of class-2 noise rows
    Eigen::MatrixXd Q;          // sum of noise outer products
};
GramPair sample_gram(const RidgeScenario& sc, double sigma2, Rng& rng);

}  // namespace adrob
