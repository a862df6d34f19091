#include "adrob/stable_theory.hpp"

#include <algorithm>
#include <cmath>

#include "adrob/norms.hpp"
#include "adrob/rng.hpp"

namespace adrob {

SasMixture::SasMixture(MultivariateSas p, MultivariateSas m, double R)
    : plus(std::move(p)), minus(std::move(m)), imbalance(R) {
    if (plus.kind != minus.kind || plus.alpha != minus.alpha)
        throw DomainError("SasMixture: classes must share alpha and structure kind");
    if (plus.location.size() != minus.location.size())
        throw DomainError("SasMixture: dimension mismatch");
    if (plus.kind == MultivariateSas::Kind::IndependentComponents) {
        if (plus.scales != minus.scales)
            throw DomainError("SasMixture: classes must share coordinate scales");
    } else if (plus.shape != minus.shape) {
        throw DomainError("SasMixture: classes must share the shape matrix");
    }
    if ((plus.location - minus.location).norm() == 0.0)
        throw DomainError("SasMixture: identical class means");
    if (!(imbalance >= 1.0)) throw DomainError("SasMixture: R must be >= 1");
}

namespace {

double intercept_midpoint(const SasMixture& mix, const Eigen::VectorXd& w) {
    return -0.5 * w.dot(mix.plus.location + mix.minus.location);
}

LossReport pushforward_losses(const SasMixture& mix, const LinearClassifier& clf,
                              const PerturbSpec* pert, const QuadratureOptions& quad) {
    if (clf.w.size() != mix.plus.location.size())
        throw DomainError("classwise_losses: dimension mismatch");
    const double shift = pert ? pert->epsilon * lp_norm(clf.w, pert->q()) : 0.0;
    LossReport rep;
    rep.imbalance = mix.imbalance;
    try {
        SasParams zp = linear_pushforward(mix.plus, clf.w, 0.0);
        SasParams zm = linear_pushforward(mix.minus, clf.w, 0.0);
        rep.loss_plus = sas_cdf({zp.alpha, zp.scale, 0.0},
                                shift - clf.b - zp.location, quad);
        rep.loss_minus = sas_cdf({zm.alpha, zm.scale, 0.0},
                                 shift + clf.b + zm.location, quad);
    } catch (const DegenerateScaleError&) {
        // Point-mass pushforward: 0/1 indicator limit.
        rep.loss_plus = (clf.w.dot(mix.plus.location) + clf.b <= shift) ? 1.0 : 0.0;
        rep.loss_minus = (clf.w.dot(mix.minus.location) + clf.b >= -shift) ? 1.0 : 0.0;
    }
    return rep;
}

}  // namespace

LossReport ic_classwise_losses(const SasMixture& mix, const LinearClassifier& clf,
                               const PerturbSpec* pert, const QuadratureOptions& quad) {
    if (mix.plus.kind != MultivariateSas::Kind::IndependentComponents)
        throw DomainError("ic_classwise_losses: mixture is not independent-components");
    return pushforward_losses(mix, clf, pert, quad);
}

LossReport ec_classwise_losses(const SasMixture& mix, const LinearClassifier& clf,
                               const PerturbSpec* pert, const QuadratureOptions& quad) {
    if (mix.plus.kind != MultivariateSas::Kind::EllipticallyContoured)
        throw DomainError("ec_classwise_losses: mixture is not elliptically contoured");
    return pushforward_losses(mix, clf, pert, quad);
}

IcSolution solve_ic_standard(const SasMixture& mix) {
    const double alpha = mix.plus.alpha;
    if (!(alpha > 1.0))
        throw DomainError(
            "solve_ic_standard: alpha <= 1 has a non-smooth norm; use cauchy_analysis");
    const Eigen::VectorXd tb = mix.mean_gap();
    const double ap = alpha / (alpha - 1.0);  // dual index of alpha
    Eigen::VectorXd w(tb.size());
    for (Eigen::Index i = 0; i < tb.size(); ++i)
        w[i] = (tb[i] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(tb[i]), ap - 1.0);
    w /= lp_norm(w, alpha);
    IcSolution sol;
    sol.clf.w = w;
    sol.clf.b = intercept_midpoint(mix, w);
    sol.value = w.dot(tb);
    sol.residual = std::abs(sol.value - lp_norm(tb, ap));
    return sol;
}

namespace {

// Gradient of ||w||_alpha on the unit alpha-sphere.
Eigen::VectorXd alpha_sphere_normal(const Eigen::VectorXd& w, double alpha) {
    Eigen::VectorXd n(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
        n[i] = (w[i] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(w[i]), alpha - 1.0);
    return n;
}

}  // namespace

IcSolution solve_ic_robust(const SasMixture& mix, const PerturbSpec& pert,
                           const IcSolverOptions& opts) {
    const double alpha = mix.plus.alpha;
    if (!(alpha > 1.0))
        throw DomainError(
            "solve_ic_robust: alpha <= 1 has a non-smooth norm; use cauchy_analysis");
    const Eigen::VectorXd tb = mix.mean_gap();
    const double q = pert.q();
    const double lambda = 2.0 * pert.epsilon;
    const auto objective = [&](const Eigen::VectorXd& w) {
        return w.dot(tb) - lambda * lp_norm(w, q);
    };
    const auto normalized = [&](Eigen::VectorXd w) {
        double n = lp_norm(w, alpha);
        if (n == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(w.size()));
        return Eigen::VectorXd(w / n);
    };

    // Warm starts: the standard maximizer, the dual vector of the penalty
    // norm, the peak coordinate, the uniform direction, plus random draws.
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(solve_ic_standard(mix).clf.w);
    if (q > 1.0 && !std::isinf(q)) {
        const double qp = q / (q - 1.0);
        Eigen::VectorXd wd(tb.size());
        for (Eigen::Index i = 0; i < tb.size(); ++i)
            wd[i] = (tb[i] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(tb[i]), qp - 1.0);
        starts.push_back(normalized(wd));
    }
    Eigen::Index peak;
    tb.cwiseAbs().maxCoeff(&peak);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(tb.size());
    e[peak] = (tb[peak] >= 0 ? 1.0 : -1.0);
    starts.push_back(e);
    starts.push_back(normalized(tb.cwiseSign()));
    Rng rng(opts.seed);
    for (int k = 0; k < opts.random_starts; ++k) {
        Eigen::VectorXd g(tb.size());
        for (Eigen::Index i = 0; i < tb.size(); ++i) g[i] = rng.normal();
        starts.push_back(normalized(g));
    }

    Eigen::VectorXd best;
    double best_val = -std::numeric_limits<double>::infinity();
    for (Eigen::VectorXd w : starts) {
        if (w.squaredNorm() == 0.0) continue;
        double fw = objective(w);
        double step = 1.0;
        for (int it = 0; it < opts.max_iter; ++it) {
            const Eigen::VectorXd grad = tb - lambda * lq_grad(w, q);
            // ascend along the component tangent to the alpha-sphere; the
            // normal component is killed by the renormalization anyway and
            // only degrades the line search near the optimum
            const Eigen::VectorXd nrm = alpha_sphere_normal(w, alpha);
            const Eigen::VectorXd dir =
                grad - (grad.dot(nrm) / nrm.squaredNorm()) * nrm;
            if (dir.norm() <= 1e-14 * std::max(1.0, tb.norm())) break;
            bool improved = false;
            for (double s = step; s > 1e-17; s *= 0.5) {
                Eigen::VectorXd wn = normalized(w + s * dir);
                const double fn = objective(wn);
                if (fn > fw) {
                    w = std::move(wn);
                    fw = fn;
                    improved = true;
                    step = s * 1.3;
                    break;
                }
            }
            if (!improved) break;
        }
        if (fw > best_val) {
            best_val = fw;
            best = w;
        }
    }
    if (!(best_val > -std::numeric_limits<double>::infinity()))
        throw SolverError("solve_ic_robust: no usable iterate", 0.0);

    IcSolution sol;
    sol.clf.w = best;
    sol.clf.b = intercept_midpoint(mix, best);
    sol.value = best_val;
    // First-order stationarity on the sphere: the objective gradient must
    // align with the sphere normal scaled by the (1-homogeneous) value.
    Eigen::VectorXd grad = tb - lambda * lq_grad(best, q);
    sol.residual = (grad - best_val * alpha_sphere_normal(best, alpha)).norm();
    return sol;
}

CauchyAnalysis cauchy_analysis(const SasMixture& mix, const PerturbSpec& pert,
                               const QuadratureOptions& quad) {
    if (mix.plus.alpha != 1.0)
        throw DomainError("cauchy_analysis: requires alpha = 1");
    if (mix.plus.kind != MultivariateSas::Kind::IndependentComponents ||
        (mix.plus.scales.array() != 1.0).any())
        throw DomainError("cauchy_analysis: requires identity coordinate scales");
    if (!std::isinf(pert.p)) throw DomainError("cauchy_analysis: requires p = inf");

    const Eigen::VectorXd tb = mix.mean_gap();
    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < tb.size(); ++i)
        if (std::abs(tb[i]) > std::abs(tb[peak])) peak = i;
    CauchyAnalysis res;
    res.w.w = Eigen::VectorXd::Zero(tb.size());
    res.w.w[peak] = (tb[peak] >= 0 ? 1.0 : -1.0);
    res.w.b = 0.0;

    const double R = mix.imbalance;
    const double eps = pert.epsilon;
    const double tp = res.w.w.dot(mix.plus.location);
    const double tm = res.w.w.dot(mix.minus.location);
    const double gap = tp - tm;  // = ||theta_bar||_inf
    CauchyQuadratics& cq = res.quads;

    // sgn(dl/db) = sgn(q_i(b)); coefficients from expanding
    // R (1 + (b + t+ -+ eps)^2) - (1 + (b + t- +- eps)^2).
    cq.q1 = {R - 1.0, 2.0 * (R * tp - tm), R * tp * tp - tm * tm + R - 1.0};
    cq.q2 = {R - 1.0, 2.0 * (R * (tp - eps) - (tm + eps)),
             R * (tp - eps) * (tp - eps) - (tm + eps) * (tm + eps) + R - 1.0};
    cq.delta1 = R * gap * gap - (R - 1.0) * (R - 1.0);
    cq.delta2 = R * (gap - 2.0 * eps) * (gap - 2.0 * eps) - (R - 1.0) * (R - 1.0);
    cq.d_zero = cq.delta1 >= 0.0 ? std::sqrt(cq.delta1)
                                 : std::numeric_limits<double>::quiet_NaN();
    cq.d_eps = cq.delta2 >= 0.0 ? (R + 1.0) * eps + std::sqrt(cq.delta2)
                                : std::numeric_limits<double>::quiet_NaN();
    cq.collapse_guaranteed = R >= 2.0 + 4.0 * gap * gap;
    const double kk = (1.0 - pert.kappa) * (1.0 - pert.kappa);
    cq.reduce_condition = gap * gap > (R + 1.0) * (R + 1.0) / (R * kk);

    if (R == 1.0) {
        // q_i degenerate to linear functions; the balanced optimum is the
        // midpoint intercept.
        res.balanced = true;
        res.w.b = -0.5 * (tp + tm);
        cq.b_std = res.w.b;
        cq.b_rob = res.w.b;
        res.std_losses = ic_classwise_losses(mix, res.w, nullptr, quad);
        // For R = 1 the robust optimum shares w and b, so its standard
        // losses coincide with the standard classifier's.
        res.rob_losses = res.std_losses;
        return res;
    }

    const SasParams cauchy(1.0, 1.0, 0.0);
    if (cq.delta1 >= 0.0) {
        const double s1 = std::sqrt(cq.delta1);
        cq.b_std = (-0.5 * cq.q1.a1 + s1) / cq.q1.a2;
        // plugging the larger root back in: -b - t+ = (gap - s1)/(R - 1)
        res.std_losses.loss_plus = sas_cdf(cauchy, (gap - s1) / (R - 1.0), quad);
        res.std_losses.loss_minus = sas_cdf(cauchy, (-R * gap + s1) / (R - 1.0), quad);
    } else {
        cq.b_std.reset();
        res.std_losses.loss_plus = 1.0;
        res.std_losses.loss_minus = 0.0;
    }
    res.std_losses.imbalance = R;
    if (cq.delta2 >= 0.0) {
        const double s2 = std::sqrt(cq.delta2);
        cq.b_rob = (-0.5 * cq.q2.a1 + s2) / cq.q2.a2;
        res.rob_losses.loss_plus =
            sas_cdf(cauchy, (gap - (R + 1.0) * eps - s2) / (R - 1.0), quad);
        res.rob_losses.loss_minus =
            sas_cdf(cauchy, (-R * gap + (R + 1.0) * eps + s2) / (R - 1.0), quad);
    } else {
        cq.b_rob.reset();
        res.rob_losses.loss_plus = 1.0;
        res.rob_losses.loss_minus = 0.0;
    }
    res.rob_losses.imbalance = R;
    return res;
}

}  // namespace adrob
