#pragma once

#include <Eigen/Dense>
#include <vector>

#include "adrob/types.hpp"

namespace adrob {

/// Binary Gaussian mixture P+ = N(theta_plus, Sigma), P- = N(theta_minus, Sigma)
/// with imbalance ratio R = P(y=-1)/P(y=+1) >= 1.
struct GaussianMixture {
    Eigen::VectorXd theta_plus;
    Eigen::VectorXd theta_minus;
    Eigen::MatrixXd sigma;
    double imbalance = 1.0;

    GaussianMixture(Eigen::VectorXd tp, Eigen::VectorXd tm, Eigen::MatrixXd s, double R)
        : theta_plus(std::move(tp)), theta_minus(std::move(tm)), sigma(std::move(s)), imbalance(R) {
        if (theta_plus.size() != theta_minus.size() || sigma.rows() != theta_plus.size() ||
            sigma.rows() != sigma.cols())
            throw DomainError("GaussianMixture: dimension mismatch");
        if ((theta_plus - theta_minus).norm() == 0.0)
            throw DomainError("GaussianMixture: identical class means");
        if (!(imbalance >= 1.0)) throw DomainError("GaussianMixture: R must be >= 1");
    }

    Eigen::VectorXd mean_gap() const { return theta_plus - theta_minus; }
};

/// Solutions of the stationarity system
///   Sigma u = theta_bar,  Sigma v = theta_bar - 2 eps d||v||_q,
/// with r = sqrt(u' Sigma u), s = sqrt(v' Sigma v).
struct KktSolution {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double r = 0.0;
    double s = 0.0;
    double residual_v = 0.0;
};

struct SolverOptions {
    double tol = 1e-9;
    int max_iter = 500000;
};

/// u = Sigma^{-1} theta_bar, w = u/r, and the closed-form intercept
/// b = -(2 log R + (w'th+)^2 - (w'th-)^2) / (2 (w'th+ - w'th-)).
std::pair<Eigen::VectorXd, LinearClassifier> solve_standard(const GaussianMixture& mix);

/// Minimizes F(v) = v'Sigma v / 2 - <theta_bar, v> + 2 eps ||v||_q; the
/// stationary point solves the robust KKT equation. Exact prox steps for
/// q in {1, 2, inf}, smoothed gradient descent otherwise. Throws
/// DegenerateClassifierError when v = 0 is the unique minimizer
/// (||theta_bar||_{q*} <= 2 eps).
std::pair<Eigen::VectorXd, LinearClassifier> solve_robust(const GaussianMixture& mix,
                                                          const PerturbSpec& pert,
                                                          const SolverOptions& opts = {});

/// Both KKT solutions plus norms and the robust residual.
KktSolution solve_kkt(const GaussianMixture& mix, const PerturbSpec& pert,
                      const SolverOptions& opts = {});

/// Class-wise losses of the optimal standard / robust classifier:
///   l+- = Phi((-<u, theta_bar> +- 2 log R) / (2 r))  (and the v/s analogue).
LossReport classwise_losses_standard(const GaussianMixture& mix, const KktSolution& kkt);
LossReport classwise_losses_robust(const GaussianMixture& mix, const KktSolution& kkt);

/// Standard losses of an arbitrary linear classifier via the Gaussian
/// pushforward; with pert != nullptr evaluates the robust loss (margins
/// shifted by eps ||w||_q). Degenerate w'Sigma w = 0 falls back to the
/// 0/1 indicator limit.
LossReport losses_for_classifier(const GaussianMixture& mix, const LinearClassifier& clf,
                                 const PerturbSpec* pert = nullptr);

/// Disparity gap g(R) = AD(robust) - AD(standard) over an R grid; flags the
/// rows where all four class-wise losses are <= 0.5 (the monotone region).
struct GapPoint {
    double R = 1.0;
    double ad_std = 0.0;
    double ad_rob = 0.0;
    double gap = 0.0;
    bool in_monotone_region = false;
};
std::vector<GapPoint> disparity_gap(const GaussianMixture& mix, const PerturbSpec& pert,
                                    const std::vector<double>& R_grid,
                                    const SolverOptions& opts = {});

/// The m robust / n non-robust feature example (Sigma = I, theta- = -theta+,
/// p = inf) with its closed-form classifiers and losses.
struct ToyResult {
    LossReport std_losses;
    LossReport rob_losses;
    LinearClassifier w_std;
    LinearClassifier w_rob;
    GaussianMixture mixture;
};
ToyResult toy_example(int m, int n, double eta, double gamma, double epsilon, double R);

/// Numeric certificates for the direction and norm propositions.
struct Certificates {
    double direction_lhs = 0.0;  // <u, theta_bar> / (2r)
    double direction_rhs = 0.0;  // <v, theta_bar> / (2s)
    double norm_gap = 0.0;       // u'Sigma u - v'Sigma v
    double norm_bound = 0.0;     // 4 eps ||v||_q
    double angle = 0.0;          // angle between Sigma^{1/2} w_std and Sigma^{1/2} w_rob
};
Certificates direction_norm_certificates(const KktSolution& kkt, const GaussianMixture& mix,
                                         const PerturbSpec& pert);

}  // namespace adrob
