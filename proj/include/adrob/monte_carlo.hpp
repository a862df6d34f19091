#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "adrob/gaussian.hpp"
#include "adrob/stable_theory.hpp"
#include "adrob/types.hpp"

namespace adrob {

/// Labelled synthetic dataset. Rows 0..n_plus-1 are the positive class.
struct SampleSet {
    Eigen::MatrixXd features;
    Eigen::VectorXd labels;  // +1 / -1
    double imbalance = 1.0;
    std::uint64_t seed = 0;

    Eigen::Index count_plus() const { return (labels.array() > 0).count(); }
    Eigen::Index count_minus() const { return labels.size() - count_plus(); }
};

/// n_major negative draws and round(n_major / R) positive draws,
/// deterministic under seed regardless of thread count (per-chunk
/// sub-seeded generators; `parallel` only toggles OpenMP).
SampleSet sample_mixture(const GaussianMixture& mix, std::int64_t n_major,
                         std::uint64_t seed, bool parallel = true);
SampleSet sample_mixture(const SasMixture& mix, std::int64_t n_major, std::uint64_t seed,
                         bool parallel = true);

/// Per-class empirical accuracies with Wilson-score 95% half-widths. The
/// robust 0-1 indicator 1{y(w'x+b) <= eps ||w||_q} is exact for linear
/// classifiers (Holder duality), so no attack loop is run.
struct EvalReport {
    double acc_plus = 0.0;
    double acc_minus = 0.0;
    double acc_overall = 0.0;
    double ad = 0.0;  // acc_minus - acc_plus
    double ci_plus = 0.0;
    double ci_minus = 0.0;

    double ci_halfwidth() const { return std::max(ci_plus, ci_minus); }
};
EvalReport empirical_losses(const SampleSet& set, const LinearClassifier& clf,
                            const PerturbSpec* pert = nullptr, bool parallel = true);

struct TrainConfig {
    enum class Attack { None, Fgm, Pgd };
    Attack attack = Attack::None;
    PerturbSpec pert;
    double lr = 0.05;
    int batch = 64;
    int max_epochs = 400;
    int patience = 50;  // early stopping on validation loss
    int pgd_steps = 50;
    double pgd_step_size = 0.0;  // 0 = default 2.5 eps / steps
};

struct TrainResult {
    LinearClassifier clf;
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = 0;
};

/// Logistic-loss SGD on adversarially perturbed inputs with an 8:1:1
/// train/validation/test split. For linear models the FGM perturbation is
/// the exact worst case; PGD iterates the projected steps explicitly.
TrainResult adv_train_linear(const SampleSet& set, const TrainConfig& cfg,
                             std::uint64_t seed);

/// Scenario grid for the sweep runner.
struct SweepSpec {
    enum class Kind { Gaussian, StableIc, Cauchy };
    Kind kind = Kind::Gaussian;
    std::string scenario_id = "gaussian";
    Eigen::VectorXd theta_plus;
    Eigen::VectorXd theta_minus;
    Eigen::MatrixXd sigma;  // Gaussian only
    double alpha = 2.0;     // stable kinds
    std::vector<double> R_grid;
    std::vector<double> epsilon_grid;
    std::vector<double> p_grid;
    std::vector<std::uint64_t> seeds;
    std::int64_t n_major = 100000;
};

/// One row per grid cell: the robust-classifier accuracies plus the AD gap
/// against the standard classifier on the same draw.
struct SweepRow {
    std::string scenario_id;
    double R = 1.0;
    double p = 2.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    EvalReport eval;     // robust classifier
    double ad_std = 0.0; // standard classifier on the same sample
    double ad_gap = 0.0; // eval.ad - ad_std
};
std::vector<SweepRow> sweep(const SweepSpec& spec, bool parallel = true);

}  // namespace adrob
