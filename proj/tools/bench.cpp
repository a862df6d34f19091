// Serial vs OpenMP timing for the sampling / evaluation kernels. Results are
// checked for bit-identity while timing, so this doubles as a smoke test of
// the per-chunk sub-seeding.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef ADROB_HAVE_OPENMP
#include <omp.h>
#endif

#include "adrob/monte_carlo.hpp"

using namespace adrob;

namespace {

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

void report(const std::string& name, double serial, double parallel, bool identical) {
    std::printf("%-34s %9.3f ms %9.3f ms  x%5.2f  %s\n", name.c_str(), serial * 1e3,
                parallel * 1e3, serial / parallel,
                identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef ADROB_HAVE_OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled at build time; both columns run serially\n");
#endif
    std::printf("%-34s %12s %12s %7s\n", "kernel", "serial", "parallel", "speedup");

    Eigen::VectorXd tp(8);
    tp << 1.0, 0.5, -0.25, 0.3, -0.6, 0.1, 0.9, -0.2;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(8, 8);
    GaussianMixture gmix(tp, -tp, sigma, 4.0);
    SasMixture smix(MultivariateSas::independent(1.5, tp, Eigen::VectorXd::Ones(8)),
                    MultivariateSas::independent(1.5, -tp, Eigen::VectorXd::Ones(8)),
                    4.0);
    const std::int64_t n = 2000000;

    SampleSet gs, gp;
    report("sample_mixture gaussian 2e6",
           time_best_of(3, [&] { gs = sample_mixture(gmix, n, 7, false); }),
           time_best_of(3, [&] { gp = sample_mixture(gmix, n, 7, true); }),
           gs.features == gp.features);

    SampleSet ss, sp;
    report("sample_mixture stable a=1.5 2e6",
           time_best_of(3, [&] { ss = sample_mixture(smix, n, 7, false); }),
           time_best_of(3, [&] { sp = sample_mixture(smix, n, 7, true); }),
           ss.features == sp.features);

    LinearClassifier clf{tp, 0.1};
    PerturbSpec pert;
    pert.p = kInf;
    pert.epsilon = 0.2;
    EvalReport es, ep;
    report("empirical_losses 2e6",
           time_best_of(5, [&] { es = empirical_losses(gp, clf, &pert, false); }),
           time_best_of(5, [&] { ep = empirical_losses(gp, clf, &pert, true); }),
           es.acc_plus == ep.acc_plus && es.acc_minus == ep.acc_minus);

    SweepSpec spec;
    spec.theta_plus = tp;
    spec.theta_minus = -tp;
    spec.sigma = sigma;
    spec.R_grid = {1.0, 4.0, 10.0};
    spec.epsilon_grid = {0.0, 0.2};
    spec.p_grid = {2.0, kInf};
    spec.seeds = {1, 2};
    spec.n_major = 100000;
    std::vector<SweepRow> rs, rp;
    const double t_serial = time_best_of(1, [&] { rs = sweep(spec, false); });
    const double t_par = time_best_of(1, [&] { rp = sweep(spec, true); });
    bool same = rs.size() == rp.size();
    for (std::size_t i = 0; same && i < rs.size(); ++i)
        same = rs[i].eval.acc_overall == rp[i].eval.acc_overall &&
               rs[i].ad_gap == rp[i].ad_gap;
    report("sweep 24 cells n=1e5", t_serial, t_par, same);
    return 0;
}
