#include "adrob/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "adrob/linalg.hpp"
#include "adrob/stable.hpp"

namespace adrob {

namespace {

double largest_eigenvalue(const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

// Smoothed ||v||_q and its gradient for general 1 < q < inf.
double smoothed_lq(const Eigen::VectorXd& v, double q, double delta, Eigen::VectorXd* grad) {
    double acc = 0.0;
    for (double x : v) acc += std::pow(std::sqrt(x * x + delta * delta), q);
    double n = std::pow(acc, 1.0 / q);
    if (grad) {
        grad->resize(v.size());
        double scale = std::pow(n, 1.0 - q);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            double m = std::sqrt(v[i] * v[i] + delta * delta);
            (*grad)[i] = scale * std::pow(m, q - 1.0) * (v[i] / m);
        }
    }
    return n;
}

// FISTA with exact prox steps (q in {1, 2, inf}). Returns v and the
// prox-gradient fixed-point residual.
std::pair<Eigen::VectorXd, double> prox_solve(const Eigen::MatrixXd& S,
                                              const Eigen::VectorXd& rhs, double lambda,
                                              double q, const SolverOptions& opts) {
    const double L = std::max(largest_eigenvalue(S), 1e-12);
    const double t = 1.0 / L;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd y = v;
    double momentum = 1.0;
    double residual = std::numeric_limits<double>::infinity();
    const double target = opts.tol * std::max(1.0, rhs.norm());
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::VectorXd grad = S * y - rhs;
        Eigen::VectorXd vn = prox_lq(y - t * grad, t * lambda, q);
        double mn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = vn + ((momentum - 1.0) / mn) * (vn - v);
        momentum = mn;
        v = vn;
        if (it % 16 == 0) {
            Eigen::VectorXd fp = v - prox_lq(v - t * (S * v - rhs), t * lambda, q);
            residual = fp.norm() / t;
            if (residual <= target) break;
        }
    }
    return {v, residual};
}

// Accelerated gradient with backtracking on the smoothed objective
// (general 1 < q < inf).
std::pair<Eigen::VectorXd, double> smooth_solve(const Eigen::MatrixXd& S,
                                                const Eigen::VectorXd& rhs, double lambda,
                                                double q, const SolverOptions& opts) {
    const double delta = 1e-12;
    // warm start at the unpenalized minimizer; the penalty only shrinks it
    Eigen::VectorXd v;
    try {
        v = spd_solve(S, rhs);
    } catch (const InconsistentSystemError&) {
        v = rhs * (0.5 / std::max(largest_eigenvalue(S), 1e-12));
    }
    const double target = opts.tol * std::max(1.0, rhs.norm());
    double residual = std::numeric_limits<double>::infinity();
    auto objective = [&](const Eigen::VectorXd& x) {
        return 0.5 * x.dot(S * x) - rhs.dot(x) + lambda * smoothed_lq(x, q, delta, nullptr);
    };
    // Damped Newton: first-order methods stall at the double-precision
    // noise floor of the objective before reaching the residual target.
    // With h(v) = (sum m_i^q)^{1/q}, m_i = sqrt(v_i^2 + delta^2):
    //   grad h = A^{1/q-1} g,  g_i = m_i^{q-2} v_i,  A = sum m_i^q,
    //   hess h = (1-q) A^{1/q-2} g g' + A^{1/q-1} diag(m^{q-2} + (q-2) m^{q-4} v^2).
    const Eigen::Index d = rhs.size();
    const int newton_iters = std::min(opts.max_iter, 200);
    for (int it = 0; it < newton_iters; ++it) {
        double A = 0.0;
        Eigen::VectorXd m(d), g(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            m[i] = std::sqrt(v[i] * v[i] + delta * delta);
            A += std::pow(m[i], q);
            g[i] = std::pow(m[i], q - 2.0) * v[i];
        }
        Eigen::VectorXd grad = S * v - rhs + lambda * std::pow(A, 1.0 / q - 1.0) * g;
        residual = grad.norm();
        if (residual <= target) break;
        Eigen::MatrixXd H = S;
        H += (lambda * (1.0 - q) * std::pow(A, 1.0 / q - 2.0)) * (g * g.transpose());
        const double s = lambda * std::pow(A, 1.0 / q - 1.0);
        for (Eigen::Index i = 0; i < d; ++i)
            H(i, i) += s * (std::pow(m[i], q - 2.0) +
                            (q - 2.0) * std::pow(m[i], q - 4.0) * v[i] * v[i]);
        Eigen::VectorXd dir = H.ldlt().solve(-grad);
        if (!(dir.dot(grad) < 0.0)) dir = -grad;
        const double fv = objective(v);
        const double slope = dir.dot(grad);
        double t = 1.0;
        while (t > 1e-20 && objective(v + t * dir) > fv + 1e-4 * t * slope) t *= 0.5;
        v += t * dir;
    }
    return {v, residual};
}

double robust_intercept(const GaussianMixture& mix, const Eigen::VectorXd& w, double eps_wq) {
    const double wp = w.dot(mix.theta_plus);
    const double wm = w.dot(mix.theta_minus);
    const double den = wp - wm - 2.0 * eps_wq;
    return -(2.0 * std::log(mix.imbalance) + wp * wp - wm * wm - 2.0 * eps_wq * (wp + wm)) /
           (2.0 * den);
}

}  // namespace

std::pair<Eigen::VectorXd, LinearClassifier> solve_standard(const GaussianMixture& mix) {
    Eigen::VectorXd u = spd_solve(mix.sigma, mix.mean_gap());
    const double r = std::sqrt(u.dot(mix.sigma * u));
    LinearClassifier clf;
    clf.w = u / r;
    clf.b = robust_intercept(mix, clf.w, 0.0);
    return {std::move(u), std::move(clf)};
}

std::pair<Eigen::VectorXd, LinearClassifier> solve_robust(const GaussianMixture& mix,
                                                          const PerturbSpec& pert,
                                                          const SolverOptions& opts) {
    const Eigen::VectorXd theta_bar = mix.mean_gap();
    const double q = pert.q();
    const double lambda = 2.0 * pert.epsilon;
    if (pert.epsilon == 0.0) {
        auto [u, clf] = solve_standard(mix);
        return {std::move(u), std::move(clf)};
    }
    // v = 0 is stationary iff theta_bar lies in 2 eps * (unit ball of the
    // dual norm): no usable direction survives.
    if (lp_norm(theta_bar, dual_index(q)) <= lambda)
        throw DegenerateClassifierError(
            "solve_robust: v = 0 (2 eps d||0||_q contains theta_bar)");

    auto [v, residual] =
        (q == 1.0 || q == 2.0 || std::isinf(q))
            ? prox_solve(mix.sigma, theta_bar, lambda, q, opts)
            : smooth_solve(mix.sigma, theta_bar, lambda, q, opts);
    if (residual > 10.0 * opts.tol * std::max(1.0, theta_bar.norm()))
        throw SolverError("solve_robust: residual above tolerance", residual);
    const double s = std::sqrt(v.dot(mix.sigma * v));
    if (s == 0.0) throw DegenerateClassifierError("solve_robust: v'Sigma v = 0");
    LinearClassifier clf;
    clf.w = v / s;
    clf.b = robust_intercept(mix, clf.w, pert.epsilon * lp_norm(clf.w, q));
    return {std::move(v), std::move(clf)};
}

KktSolution solve_kkt(const GaussianMixture& mix, const PerturbSpec& pert,
                      const SolverOptions& opts) {
    KktSolution kkt;
    auto [u, cs] = solve_standard(mix);
    kkt.u = std::move(u);
    kkt.r = std::sqrt(kkt.u.dot(mix.sigma * kkt.u));
    auto [v, cr] = solve_robust(mix, pert, opts);
    kkt.v = std::move(v);
    kkt.s = std::sqrt(kkt.v.dot(mix.sigma * kkt.v));
    const double q = pert.q();
    if (q > 1.0 && !std::isinf(q))
        kkt.residual_v =
            (mix.sigma * kkt.v + 2.0 * pert.epsilon * lq_grad(kkt.v, q) - mix.mean_gap()).norm();
    else {
        // Nonsmooth q: fixed-point residual of the prox-gradient map.
        const double t = 1.0 / largest_eigenvalue(mix.sigma);
        Eigen::VectorXd fp =
            kkt.v - prox_lq(kkt.v - t * (mix.sigma * kkt.v - mix.mean_gap()),
                            t * 2.0 * pert.epsilon, q);
        kkt.residual_v = fp.norm() / t;
    }
    return kkt;
}

namespace {
LossReport theorem_losses(double inner, double norm, double R) {
    LossReport rep;
    rep.imbalance = R;
    rep.loss_plus = normal_cdf((-inner + 2.0 * std::log(R)) / (2.0 * norm));
    rep.loss_minus = normal_cdf((-inner - 2.0 * std::log(R)) / (2.0 * norm));
    return rep;
}
}  // namespace

LossReport classwise_losses_standard(const GaussianMixture& mix, const KktSolution& kkt) {
    return theorem_losses(kkt.u.dot(mix.mean_gap()), kkt.r, mix.imbalance);
}

LossReport classwise_losses_robust(const GaussianMixture& mix, const KktSolution& kkt) {
    return theorem_losses(kkt.v.dot(mix.mean_gap()), kkt.s, mix.imbalance);
}

LossReport losses_for_classifier(const GaussianMixture& mix, const LinearClassifier& clf,
                                 const PerturbSpec* pert) {
    const double sw = std::sqrt(std::max(0.0, clf.w.dot(mix.sigma * clf.w)));
    const double shift = pert ? pert->epsilon * lp_norm(clf.w, pert->q()) : 0.0;
    const double mp = clf.w.dot(mix.theta_plus) + clf.b;
    const double mm = clf.w.dot(mix.theta_minus) + clf.b;
    LossReport rep;
    rep.imbalance = mix.imbalance;
    if (sw == 0.0) {
        // Point-mass pushforward: 0/1 indicator limit.
        rep.loss_plus = (mp <= shift) ? 1.0 : 0.0;
        rep.loss_minus = (mm >= -shift) ? 1.0 : 0.0;
        return rep;
    }
    rep.loss_plus = normal_cdf((-mp + shift) / sw);
    rep.loss_minus = normal_cdf((mm + shift) / sw);
    return rep;
}

std::vector<GapPoint> disparity_gap(const GaussianMixture& mix, const PerturbSpec& pert,
                                    const std::vector<double>& R_grid,
                                    const SolverOptions& opts) {
    // u and v do not depend on R; only the intercept (through log R) does.
    GaussianMixture base(mix.theta_plus, mix.theta_minus, mix.sigma, 1.0);
    KktSolution kkt = solve_kkt(base, pert, opts);
    const double iu = kkt.u.dot(base.mean_gap());
    const double iv = kkt.v.dot(base.mean_gap());
    std::vector<GapPoint> out;
    out.reserve(R_grid.size());
    for (double R : R_grid) {
        if (!(R >= 1.0)) throw DomainError("disparity_gap: R must be >= 1");
        LossReport std_rep = theorem_losses(iu, kkt.r, R);
        LossReport rob_rep = theorem_losses(iv, kkt.s, R);
        GapPoint pt;
        pt.R = R;
        pt.ad_std = std_rep.ad();
        pt.ad_rob = rob_rep.ad();
        pt.gap = pt.ad_rob - pt.ad_std;
        pt.in_monotone_region = std_rep.loss_plus <= 0.5 && std_rep.loss_minus <= 0.5 &&
                                rob_rep.loss_plus <= 0.5 && rob_rep.loss_minus <= 0.5;
        out.push_back(pt);
    }
    return out;
}

ToyResult toy_example(int m, int n, double eta, double gamma, double epsilon, double R) {
    if (m < 1 || n < 1) throw DomainError("toy_example: m, n must be >= 1");
    if (!(gamma < epsilon && epsilon < eta))
        throw DomainError("toy_example: requires gamma < epsilon < eta");
    const int d = m + n;
    Eigen::VectorXd theta_plus(d);
    theta_plus.head(m).setConstant(eta);
    theta_plus.tail(n).setConstant(gamma);
    GaussianMixture mix(theta_plus, -theta_plus, Eigen::MatrixXd::Identity(d, d), R);

    const double logR = std::log(R);
    const double a_std = std::sqrt(m * eta * eta + n * gamma * gamma);
    const double a_rob = std::sqrt(static_cast<double>(m)) * eta;

    ToyResult res{{}, {}, {}, {}, mix};
    res.std_losses.imbalance = R;
    res.std_losses.loss_plus = normal_cdf(logR / (2.0 * a_std) - a_std);
    res.std_losses.loss_minus = normal_cdf(-logR / (2.0 * a_std) - a_std);
    const double den = 2.0 * std::sqrt(static_cast<double>(m)) * (eta - epsilon);
    res.rob_losses.imbalance = R;
    res.rob_losses.loss_plus = normal_cdf(logR / den - a_rob);
    res.rob_losses.loss_minus = normal_cdf(-logR / den - a_rob);

    res.w_std.w = theta_plus / a_std;
    res.w_std.b = -logR / (2.0 * a_std);
    res.w_rob.w = Eigen::VectorXd::Zero(d);
    res.w_rob.w.head(m).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
    res.w_rob.b = -logR / den;
    return res;
}

Certificates direction_norm_certificates(const KktSolution& kkt, const GaussianMixture& mix,
                                         const PerturbSpec& pert) {
    Certificates c;
    const Eigen::VectorXd theta_bar = mix.mean_gap();
    c.direction_lhs = kkt.u.dot(theta_bar) / (2.0 * kkt.r);
    c.direction_rhs = kkt.v.dot(theta_bar) / (2.0 * kkt.s);
    c.norm_gap = kkt.u.dot(mix.sigma * kkt.u) - kkt.v.dot(mix.sigma * kkt.v);
    c.norm_bound = 4.0 * pert.epsilon * lp_norm(kkt.v, pert.q());
    const Eigen::MatrixXd half = spd_sqrt(mix.sigma);
    Eigen::VectorXd a = half * kkt.u, b = half * kkt.v;
    double cosang = a.dot(b) / (a.norm() * b.norm());
    c.angle = std::acos(std::clamp(cosang, -1.0, 1.0));
    return c;
}

}  // namespace adrob
