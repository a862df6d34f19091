#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "adrob/errors.hpp"
#include "adrob/norms.hpp"

namespace adrob {

/// sgn(w'x + b).
struct LinearClassifier {
    Eigen::VectorXd w;
    double b = 0.0;

    double margin(const Eigen::VectorXd& x) const { return w.dot(x) + b; }
};

/// lp perturbation ball of radius epsilon; q is the Holder dual of p.
/// kappa is the fraction in the paper-style radius assumption
/// eps <= (kappa/2) ||theta_bar||_inf (opt-in via check_radius).
struct PerturbSpec {
    double p = 2.0;
    double epsilon = 0.0;
    double kappa = 0.99;

    double q() const { return dual_index(p); }

    void check_radius(const Eigen::VectorXd& theta_bar) const {
        if (!(kappa < 1.0)) throw DomainError("PerturbSpec: kappa must be < 1");
        double lim = 0.5 * kappa * theta_bar.lpNorm<Eigen::Infinity>();
        if (epsilon > lim)
            throw DomainError("PerturbSpec: epsilon exceeds (kappa/2)||theta_bar||_inf");
    }
};

/// Class-wise standard losses and the accuracy disparity they induce.
/// The positive class is the minority (weight 1/(R+1)), the negative
/// class the majority (weight R/(R+1)); AD = acc_minus - acc_plus.
struct LossReport {
    double loss_plus = 0.0;
    double loss_minus = 0.0;
    double imbalance = 1.0;

    double acc_plus() const { return 1.0 - loss_plus; }
    double acc_minus() const { return 1.0 - loss_minus; }
    double overall() const {
        return (imbalance * loss_minus + loss_plus) / (imbalance + 1.0);
    }
    double ad() const { return loss_plus - loss_minus; }
};

}  // namespace adrob
