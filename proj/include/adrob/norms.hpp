#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "adrob/errors.hpp"

namespace adrob {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// ||v||_p for p in [1, inf]. Also accepts p in (0, 1) as the alpha
/// quasi-norm used by the stable-mixture pushforward.
inline double lp_norm(const Eigen::VectorXd& v, double p) {
    if (p <= 0.0) throw DomainError("lp_norm: p must be positive");
    if (std::isinf(p)) return v.lpNorm<Eigen::Infinity>();
    if (p == 1.0) return v.lpNorm<1>();
    if (p == 2.0) return v.norm();
    double acc = 0.0;
    for (double x : v) acc += std::pow(std::abs(x), p);
    return std::pow(acc, 1.0 / p);
}

/// Dual index q with 1/p + 1/q = 1.
inline double dual_index(double p) {
    if (p < 1.0) throw DomainError("dual_index: p must be >= 1");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

/// Gradient of ||v||_q at v != 0 for 1 < q < inf:
/// d/dv_i = sgn(v_i) |v_i|^{q-1} / ||v||_q^{q-1}.
/// For q = 1 returns the sign subgradient (0 at zero coordinates);
/// for q = inf returns the peak-coordinate subgradient (lowest index on ties).
inline Eigen::VectorXd lq_grad(const Eigen::VectorXd& v, double q) {
    const auto d = v.size();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    if (q == 1.0) {
        for (Eigen::Index i = 0; i < d; ++i)
            g[i] = (v[i] > 0.0) - (v[i] < 0.0);
        return g;
    }
    if (std::isinf(q)) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < d; ++i)
            if (std::abs(v[i]) > std::abs(v[best])) best = i;
        g[best] = (v[best] > 0.0) - (v[best] < 0.0);
        return g;
    }
    double n = lp_norm(v, q);
    if (n == 0.0) throw DomainError("lq_grad: gradient undefined at 0");
    for (Eigen::Index i = 0; i < d; ++i) {
        double s = (v[i] > 0.0) - (v[i] < 0.0);
        g[i] = s * std::pow(std::abs(v[i]) / n, q - 1.0);
    }
    return g;
}

/// Euclidean projection onto the l1 ball of the given radius
/// (sort-based simplex algorithm).
inline Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
    if (radius < 0.0) throw DomainError("project_l1_ball: negative radius");
    if (v.lpNorm<1>() <= radius) return v;
    Eigen::VectorXd a = v.cwiseAbs();
    std::vector<double> s(a.data(), a.data() + a.size());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cum += s[k];
        double t = (cum - radius) / static_cast<double>(k + 1);
        if (k + 1 == s.size() || s[k + 1] <= t) {
            theta = t;
            break;
        }
    }
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double m = std::abs(v[i]) - theta;
        out[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
    }
    return out;
}

/// prox_{lambda ||.||_q}(x) for q in {1, 2, inf}.
///  q=1  : coordinate soft-threshold.
///  q=2  : block soft-threshold.
///  q=inf: Moreau identity x - Proj_{lambda B_1}(x).
inline Eigen::VectorXd prox_lq(const Eigen::VectorXd& x, double lambda, double q) {
    if (lambda < 0.0) throw DomainError("prox_lq: negative lambda");
    if (q == 1.0) {
        Eigen::VectorXd out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double m = std::abs(x[i]) - lambda;
            out[i] = m > 0.0 ? (x[i] > 0.0 ? m : -m) : 0.0;
        }
        return out;
    }
    if (q == 2.0) {
        double n = x.norm();
        if (n <= lambda) return Eigen::VectorXd::Zero(x.size());
        return x * (1.0 - lambda / n);
    }
    if (std::isinf(q)) return x - project_l1_ball(x, lambda);
    throw DomainError("prox_lq: exact prox only for q in {1, 2, inf}");
}

}  // namespace adrob
