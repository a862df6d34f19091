#pragma once

#include <Eigen/Dense>
#include <optional>

#include "adrob/stable.hpp"
#include "adrob/types.hpp"

namespace adrob {

/// Binary mixture of multivariate SaS laws sharing alpha and scale structure.
struct SasMixture {
    MultivariateSas plus;
    MultivariateSas minus;
    double imbalance = 1.0;

    SasMixture(MultivariateSas p, MultivariateSas m, double R);

    Eigen::VectorXd mean_gap() const { return plus.location - minus.location; }
};

struct IcSolverOptions {
    double tol = 1e-12;
    int max_iter = 5000;
    int random_starts = 20;
    std::uint64_t seed = 0x5eed;
};

/// Optimal direction on the alpha-sphere plus the achieved objective value
/// and a first-order stationarity residual.
struct IcSolution {
    LinearClassifier clf;
    double value = 0.0;
    double residual = 0.0;
};

/// Standard classifier for an independent-components mixture: the Holder
/// maximizer w_i ~ sgn(tb_i)|tb_i|^{a'-1} with ||w||_alpha = 1, value
/// ||theta_bar||_{alpha'}, and b = -w'(th+ + th-)/2. Requires alpha > 1.
IcSolution solve_ic_standard(const SasMixture& mix);

/// Maximizes w'theta_bar - 2 eps ||w||_q over the alpha-sphere (projected
/// gradient ascent on the scale-invariant ratio, multi-start).
IcSolution solve_ic_robust(const SasMixture& mix, const PerturbSpec& pert,
                           const IcSolverOptions& opts = {});

/// Class-wise losses of an arbitrary linear classifier under the mixture,
/// via the univariate pushforward of w'X. Works for both IC and EC
/// mixtures; with pert != nullptr both margins shift by eps ||w||_q.
LossReport ic_classwise_losses(const SasMixture& mix, const LinearClassifier& clf,
                               const PerturbSpec* pert = nullptr,
                               const QuadratureOptions& quad = {});
LossReport ec_classwise_losses(const SasMixture& mix, const LinearClassifier& clf,
                               const PerturbSpec* pert = nullptr,
                               const QuadratureOptions& quad = {});

struct Quadratic {
    double a2 = 0.0;  // quadratic coefficient
    double a1 = 0.0;  // linear coefficient
    double a0 = 0.0;  // constant

    double eval(double b) const { return (a2 * b + a1) * b + a0; }
    // quarter discriminant (a1/2)^2 - a2 a0, the Delta of the analysis
    double quarter_discriminant() const { return 0.25 * a1 * a1 - a2 * a0; }
};

/// The two intercept quadratics of the Cauchy (alpha = 1, p = inf)
/// analysis, their discriminants, intercepts (nullopt = the b -> -inf
/// collapse), and the disparity comparators d(eps), d(0).
struct CauchyQuadratics {
    Quadratic q1;
    Quadratic q2;
    double delta1 = 0.0;
    double delta2 = 0.0;
    std::optional<double> b_std;
    std::optional<double> b_rob;
    double d_eps = 0.0;   // (R+1) eps + sqrt(Delta2); NaN when Delta2 < 0
    double d_zero = 0.0;  // sqrt(Delta1); NaN when Delta1 < 0
    bool collapse_guaranteed = false;  // R >= 2 + 4 ||tb||_inf^2
    bool reduce_condition = false;     // ||tb||_inf^2 > (R+1)^2 / (R (1-kappa)^2)
};

struct CauchyAnalysis {
    CauchyQuadratics quads;
    LinearClassifier w;  // canonical peak-coordinate direction, ||w||_1 = 1
    LossReport std_losses;
    LossReport rob_losses;
    bool balanced = false;  // R = 1 path (quadratics degenerate to linear)
};

/// Full intercept analysis for the Cauchy mixture with identity scales and
/// l_inf perturbations. Collapse (negative discriminant) reports losses
/// 0 on the majority and 1 on the minority class.
CauchyAnalysis cauchy_analysis(const SasMixture& mix, const PerturbSpec& pert,
                               const QuadratureOptions& quad = {});

}  // namespace adrob
