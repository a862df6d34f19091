#include "adrob/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adrob/linalg.hpp"
#include "adrob/norms.hpp"
#include "adrob/stable.hpp"

namespace adrob {

namespace {

constexpr Eigen::Index kChunk = 4096;
constexpr double kZ95 = 1.959963984540054;

// Fills rows [begin, begin+count) of X, one sub-seeded generator per chunk,
// so the result is identical with and without OpenMP.
template <class Fill>
void fill_rows(Eigen::MatrixXd& X, Eigen::Index begin, Eigen::Index count,
               std::uint64_t seed, std::uint64_t tag, bool parallel, const Fill& fill) {
    const auto chunks = static_cast<long long>((count + kChunk - 1) / kChunk);
#ifdef ADROB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (long long c = 0; c < chunks; ++c) {
        Rng rng(subseed(seed, tag, static_cast<std::uint64_t>(c)));
        const Eigen::Index lo = begin + c * kChunk;
        const Eigen::Index hi = std::min(begin + count, lo + kChunk);
        for (Eigen::Index i = lo; i < hi; ++i) fill(rng, i);
    }
    (void)parallel;
}

SampleSet make_set(Eigen::Index n_plus, Eigen::Index n_minus, Eigen::Index d, double R,
                   std::uint64_t seed) {
    SampleSet set;
    set.features.resize(n_plus + n_minus, d);
    set.labels.resize(n_plus + n_minus);
    set.labels.head(n_plus).setConstant(1.0);
    set.labels.tail(n_minus).setConstant(-1.0);
    set.imbalance = R;
    set.seed = seed;
    return set;
}

double wilson_halfwidth(double phat, double n) {
    const double z2 = kZ95 * kZ95;
    return kZ95 * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

}  // namespace

SampleSet sample_mixture(const GaussianMixture& mix, std::int64_t n_major,
                         std::uint64_t seed, bool parallel) {
    if (n_major < 1) throw DomainError("sample_mixture: n_major must be >= 1");
    const double R = mix.imbalance;
    const auto n_plus = static_cast<Eigen::Index>(std::llround(n_major / R));
    const Eigen::Index d = mix.theta_plus.size();
    SampleSet set = make_set(n_plus, n_major, d, R, seed);
    const Eigen::MatrixXd root = spd_sqrt(mix.sigma);
    auto gauss_row = [&](const Eigen::VectorXd& theta) {
        return [&, theta](Rng& rng, Eigen::Index i) {
            Eigen::VectorXd g(d);
            for (Eigen::Index j = 0; j < d; ++j) g[j] = rng.normal();
            set.features.row(i) = (theta + root * g).transpose();
        };
    };
    fill_rows(set.features, 0, n_plus, seed, 1, parallel, gauss_row(mix.theta_plus));
    fill_rows(set.features, n_plus, n_major, seed, 2, parallel, gauss_row(mix.theta_minus));
    return set;
}

SampleSet sample_mixture(const SasMixture& mix, std::int64_t n_major, std::uint64_t seed,
                         bool parallel) {
    if (n_major < 1) throw DomainError("sample_mixture: n_major must be >= 1");
    const double R = mix.imbalance;
    const auto n_plus = static_cast<Eigen::Index>(std::llround(n_major / R));
    const Eigen::Index d = mix.plus.location.size();
    SampleSet set = make_set(n_plus, n_major, d, R, seed);
    const double alpha = mix.plus.alpha;
    const bool ic = mix.plus.kind == MultivariateSas::Kind::IndependentComponents;
    const Eigen::MatrixXd root = ic ? Eigen::MatrixXd() : spd_sqrt(mix.plus.shape);
    auto stable_row = [&](const MultivariateSas& mv) {
        return [&, theta = mv.location](Rng& rng, Eigen::Index i) {
            if (ic) {
                for (Eigen::Index j = 0; j < d; ++j)
                    set.features(i, j) =
                        theta[j] + mix.plus.scales[j] * sas_standard_draw(alpha, rng);
            } else {
                const double amp =
                    alpha == 2.0 ? M_SQRT2
                                 : std::sqrt(2.0 * positive_stable_draw(alpha / 2.0, rng));
                Eigen::VectorXd g(d);
                for (Eigen::Index j = 0; j < d; ++j) g[j] = rng.normal();
                set.features.row(i) = (theta + amp * (root * g)).transpose();
            }
        };
    };
    fill_rows(set.features, 0, n_plus, seed, 1, parallel, stable_row(mix.plus));
    fill_rows(set.features, n_plus, n_major, seed, 2, parallel, stable_row(mix.minus));
    return set;
}

EvalReport empirical_losses(const SampleSet& set, const LinearClassifier& clf,
                            const PerturbSpec* pert, bool parallel) {
    const Eigen::Index n = set.labels.size();
    const Eigen::Index n_plus = set.count_plus();
    const Eigen::Index n_minus = n - n_plus;
    if (n_plus == 0 || n_minus == 0)
        throw DomainError("empirical_losses: both classes must be nonempty");
    const double shift = pert ? pert->epsilon * lp_norm(clf.w, pert->q()) : 0.0;

    long long err_plus = 0, err_minus = 0;
#ifdef ADROB_HAVE_OPENMP
#pragma omp parallel for schedule(static) reduction(+ : err_plus, err_minus) if (parallel)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const double margin = set.labels[i] * (clf.w.dot(set.features.row(i)) + clf.b);
        if (margin <= shift) {
            if (set.labels[i] > 0)
                ++err_plus;
            else
                ++err_minus;
        }
    }
    (void)parallel;

    EvalReport rep;
    rep.acc_plus = 1.0 - static_cast<double>(err_plus) / static_cast<double>(n_plus);
    rep.acc_minus = 1.0 - static_cast<double>(err_minus) / static_cast<double>(n_minus);
    rep.acc_overall =
        1.0 - static_cast<double>(err_plus + err_minus) / static_cast<double>(n);
    rep.ad = rep.acc_minus - rep.acc_plus;
    rep.ci_plus = wilson_halfwidth(1.0 - rep.acc_plus, static_cast<double>(n_plus));
    rep.ci_minus = wilson_halfwidth(1.0 - rep.acc_minus, static_cast<double>(n_minus));
    return rep;
}

namespace {

// Worst-case input perturbation for a linear model. FGM is exact; PGD
// iterates projected steps (p in {2, inf}) and lands on the same point.
Eigen::VectorXd adversarial_point(const Eigen::VectorXd& x, double y,
                                  const Eigen::VectorXd& w, const TrainConfig& cfg) {
    const double eps = cfg.pert.epsilon;
    if (cfg.attack == TrainConfig::Attack::None || eps == 0.0 || w.norm() == 0.0) return x;
    const double q = cfg.pert.q();
    const bool pgd_supported =
        cfg.attack == TrainConfig::Attack::Pgd && (cfg.pert.p == 2.0 || std::isinf(cfg.pert.p));
    if (!pgd_supported) return x - y * eps * lq_grad(w, q);

    const double step = cfg.pgd_step_size > 0.0 ? cfg.pgd_step_size
                                                : 2.5 * eps / cfg.pgd_steps;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(x.size());
    for (int t = 0; t < cfg.pgd_steps; ++t) {
        if (std::isinf(cfg.pert.p)) {
            delta -= step * y * w.cwiseSign();
            delta = delta.cwiseMax(-eps).cwiseMin(eps);
        } else {
            delta -= step * y * w / w.norm();
            const double nrm = delta.norm();
            if (nrm > eps) delta *= eps / nrm;
        }
    }
    return x + delta;
}

double logistic(double z) {
    return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TrainResult adv_train_linear(const SampleSet& set, const TrainConfig& cfg,
                             std::uint64_t seed) {
    if (cfg.patience < 1) throw DomainError("adv_train_linear: patience must be >= 1");
    const Eigen::Index n = set.labels.size();
    const Eigen::Index d = set.features.cols();

    // 8:1:1 split on a seeded shuffle
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng split_rng(subseed(seed, 0xA11));
    for (Eigen::Index i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[split_rng.bits() % static_cast<std::uint64_t>(i + 1)]);
    const Eigen::Index n_train = (n * 8) / 10;
    const Eigen::Index n_val = n / 10;
    std::vector<Eigen::Index> train(idx.begin(), idx.begin() + n_train);
    std::vector<Eigen::Index> val(idx.begin() + n_train, idx.begin() + n_train + n_val);
    if (train.empty() || val.empty())
        throw DomainError("adv_train_linear: dataset too small to split");

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    const bool robust = cfg.attack != TrainConfig::Attack::None;
    auto val_loss = [&]() {
        const double shift = robust ? cfg.pert.epsilon * lp_norm(w, cfg.pert.q()) : 0.0;
        double acc = 0.0;
        for (Eigen::Index i : val)
            acc += logistic(set.labels[i] * (w.dot(set.features.row(i)) + b) - shift);
        return acc / static_cast<double>(val.size());
    };

    TrainResult res;
    Eigen::VectorXd best_w = w;
    double best_b = b, best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(subseed(seed, 0xE0, static_cast<std::uint64_t>(epoch)));
        for (Eigen::Index i = n_train - 1; i > 0; --i)
            std::swap(train[i], train[shuffle_rng.bits() % static_cast<std::uint64_t>(i + 1)]);

        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n_train; start += cfg.batch) {
            const Eigen::Index stop = std::min<Eigen::Index>(start + cfg.batch, n_train);
            Eigen::VectorXd gw = Eigen::VectorXd::Zero(d);
            double gb = 0.0;
            for (Eigen::Index k = start; k < stop; ++k) {
                const Eigen::Index i = train[k];
                const double y = set.labels[i];
                const Eigen::VectorXd x =
                    adversarial_point(set.features.row(i).transpose(), y, w, cfg);
                const double z = y * (w.dot(x) + b);
                epoch_loss += logistic(z);
                const double coeff = -y * sigmoid(-z);
                gw += coeff * x;
                gb += coeff;
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            w -= cfg.lr * inv * gw;
            b -= cfg.lr * inv * gb;
        }
        epoch_loss /= static_cast<double>(n_train);
        if (!std::isfinite(epoch_loss))
            throw SolverError("adv_train_linear: training loss diverged", epoch_loss);
        res.train_loss.push_back(epoch_loss);
        const double vl = val_loss();
        res.val_loss.push_back(vl);
        if (vl < best_val - 1e-12) {
            best_val = vl;
            best_w = w;
            best_b = b;
            res.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    res.clf.w = std::move(best_w);
    res.clf.b = best_b;
    return res;
}

namespace {

struct CellClassifiers {
    LinearClassifier std_clf;
    LinearClassifier rob_clf;
};

CellClassifiers solve_cell(const SweepSpec& spec, double R, double p, double eps) {
    PerturbSpec pert;
    pert.p = p;
    pert.epsilon = eps;
    CellClassifiers out;
    switch (spec.kind) {
        case SweepSpec::Kind::Gaussian: {
            GaussianMixture mix(spec.theta_plus, spec.theta_minus, spec.sigma, R);
            out.std_clf = solve_standard(mix).second;
            out.rob_clf = eps > 0.0 ? solve_robust(mix, pert).second : out.std_clf;
            break;
        }
        case SweepSpec::Kind::StableIc: {
            const Eigen::Index d = spec.theta_plus.size();
            SasMixture mix(MultivariateSas::independent(spec.alpha, spec.theta_plus,
                                                        Eigen::VectorXd::Ones(d)),
                           MultivariateSas::independent(spec.alpha, spec.theta_minus,
                                                        Eigen::VectorXd::Ones(d)),
                           R);
            out.std_clf = solve_ic_standard(mix).clf;
            out.rob_clf = eps > 0.0 ? solve_ic_robust(mix, pert).clf : out.std_clf;
            break;
        }
        case SweepSpec::Kind::Cauchy: {
            const Eigen::Index d = spec.theta_plus.size();
            SasMixture mix(MultivariateSas::independent(1.0, spec.theta_plus,
                                                        Eigen::VectorXd::Ones(d)),
                           MultivariateSas::independent(1.0, spec.theta_minus,
                                                        Eigen::VectorXd::Ones(d)),
                           R);
            CauchyAnalysis an = cauchy_analysis(mix, pert);
            // collapse (b -> -inf) evaluated at a finitely huge intercept
            constexpr double kFarIntercept = -1e18;
            out.std_clf.w = an.w.w;
            out.std_clf.b = an.quads.b_std.value_or(kFarIntercept);
            out.rob_clf.w = an.w.w;
            out.rob_clf.b = an.quads.b_rob.value_or(kFarIntercept);
            break;
        }
    }
    return out;
}

SampleSet sample_cell(const SweepSpec& spec, double R, std::uint64_t seed) {
    switch (spec.kind) {
        case SweepSpec::Kind::Gaussian:
            return sample_mixture(GaussianMixture(spec.theta_plus, spec.theta_minus,
                                                  spec.sigma, R),
                                  spec.n_major, seed, false);
        default: {
            const double alpha = spec.kind == SweepSpec::Kind::Cauchy ? 1.0 : spec.alpha;
            const Eigen::Index d = spec.theta_plus.size();
            SasMixture mix(MultivariateSas::independent(alpha, spec.theta_plus,
                                                        Eigen::VectorXd::Ones(d)),
                           MultivariateSas::independent(alpha, spec.theta_minus,
                                                        Eigen::VectorXd::Ones(d)),
                           R);
            return sample_mixture(mix, spec.n_major, seed, false);
        }
    }
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec, bool parallel) {
    std::vector<SweepRow> cells;
    for (double R : spec.R_grid)
        for (double p : spec.p_grid)
            for (double eps : spec.epsilon_grid)
                for (std::uint64_t seed : spec.seeds) {
                    SweepRow row;
                    row.scenario_id = spec.scenario_id;
                    row.R = R;
                    row.p = p;
                    row.epsilon = eps;
                    row.seed = seed;
                    cells.push_back(std::move(row));
                }
    const auto n = static_cast<long long>(cells.size());
#ifdef ADROB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (long long i = 0; i < n; ++i) {
        SweepRow& row = cells[i];
        CellClassifiers clfs = solve_cell(spec, row.R, row.p, row.epsilon);
        SampleSet set =
            sample_cell(spec, row.R, subseed(row.seed, static_cast<std::uint64_t>(i)));
        row.eval = empirical_losses(set, clfs.rob_clf, nullptr, false);
        row.ad_std = empirical_losses(set, clfs.std_clf, nullptr, false).ad;
        row.ad_gap = row.eval.ad - row.ad_std;
    }
    (void)parallel;
    return cells;
}

}  // namespace adrob
