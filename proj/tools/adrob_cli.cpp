// Experiment runner: solve | verify | sweep | ridge | train, driven by a TOML
// config. Reports are written as JSON plus CSV tables; file writes are atomic
// (temp + rename). Exit codes: 0 ok, 1 verification failure, 2 config error,
// 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "toml_lite.hpp"

#include "adrob/gaussian.hpp"
#include "adrob/linalg.hpp"
#include "adrob/monte_carlo.hpp"
#include "adrob/norms.hpp"
#include "adrob/ridge.hpp"
#include "adrob/rng.hpp"
#include "adrob/stable_theory.hpp"

using nlohmann::json;
using namespace adrob;

namespace {

struct Output {
    std::filesystem::path dir;
    bool want_json = true;
    bool want_csv = true;
};

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.flush()) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

void emit(const Output& out, const std::string& stem, const json& report,
          const std::string& csv) {
    if (out.want_json)
        atomic_write(out.dir / (stem + ".json"), report.dump(2) + "\n");
    if (out.want_csv) atomic_write(out.dir / (stem + ".csv"), csv);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw tomlite::ParseError("matrix rows have unequal lengths");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json(const LinearClassifier& clf) {
    return {{"w", to_json(clf.w)}, {"b", clf.b}};
}

json to_json(const LossReport& l) {
    return {{"loss_plus", l.loss_plus},   {"loss_minus", l.loss_minus},
            {"acc_plus", l.acc_plus()},   {"acc_minus", l.acc_minus()},
            {"acc_overall", 1.0 - l.overall()}, {"ad", l.ad()}};
}

std::string loss_csv_header() {
    return "classifier,loss_plus,loss_minus,acc_plus,acc_minus,acc_overall,ad\n";
}

void loss_csv_row(std::ostream& out, const std::string& name, const LossReport& l) {
    out << name << ',' << l.loss_plus << ',' << l.loss_minus << ',' << l.acc_plus()
        << ',' << l.acc_minus() << ',' << 1.0 - l.overall() << ',' << l.ad() << '\n';
}

PerturbSpec read_perturbation(const tomlite::Table& cfg) {
    PerturbSpec pert;
    pert.p = cfg.norm_index("perturbation.p", 2.0);
    pert.epsilon = cfg.number_or("perturbation.epsilon", 0.0);
    pert.kappa = cfg.number_or("perturbation.kappa", 0.99);
    return pert;
}

void reject_unknown_keys(const tomlite::Table& cfg) {
    const std::string leftover = cfg.first_unconsumed();
    if (!leftover.empty())
        throw tomlite::ParseError("unknown config key '" + leftover + "'");
}

// ---------------------------------------------------------------- solve ----

int cmd_solve(const tomlite::Table& cfg, const Output& out) {
    const std::string kind = cfg.text("scenario.kind");
    json report;
    std::ostringstream csv;
    csv.precision(17);
    csv << loss_csv_header();
    report["scenario"] = kind;

    if (kind == "toy") {
        const ToyResult toy = toy_example(
            static_cast<int>(cfg.number("scenario.m")),
            static_cast<int>(cfg.number("scenario.n")), cfg.number("scenario.eta"),
            cfg.number("scenario.gamma"), cfg.number("perturbation.epsilon"),
            cfg.number("scenario.R"));
        reject_unknown_keys(cfg);
        report["standard"] = {{"classifier", to_json(toy.w_std)},
                              {"losses", to_json(toy.std_losses)}};
        report["robust"] = {{"classifier", to_json(toy.w_rob)},
                            {"losses", to_json(toy.rob_losses)}};
        loss_csv_row(csv, "standard", toy.std_losses);
        loss_csv_row(csv, "robust", toy.rob_losses);
    } else if (kind == "gaussian") {
        GaussianMixture mix(to_vector(cfg.numbers("scenario.theta_plus")),
                            to_vector(cfg.numbers("scenario.theta_minus")),
                            cfg.find("scenario.sigma")
                                ? to_matrix(cfg.matrix("scenario.sigma"))
                                : Eigen::MatrixXd(Eigen::MatrixXd::Identity(
                                      cfg.numbers("scenario.theta_plus").size(),
                                      cfg.numbers("scenario.theta_plus").size())),
                            cfg.number_or("scenario.R", 1.0));
        const PerturbSpec pert = read_perturbation(cfg);
        const std::vector<double> R_grid = cfg.numbers_or("solve.R_grid", {});
        reject_unknown_keys(cfg);

        const KktSolution kkt = solve_kkt(mix, pert);
        auto [u, clf_std] = solve_standard(mix);
        auto [v, clf_rob] = solve_robust(mix, pert);
        const LossReport ls = classwise_losses_standard(mix, kkt);
        const LossReport lr = classwise_losses_robust(mix, kkt);
        const Certificates cert = direction_norm_certificates(kkt, mix, pert);

        report["standard"] = {{"classifier", to_json(clf_std)},
                              {"losses", to_json(ls)},
                              {"r", kkt.r}};
        report["robust"] = {{"classifier", to_json(clf_rob)},
                            {"losses", to_json(lr)},
                            {"s", kkt.s},
                            {"residual", kkt.residual_v}};
        report["certificates"] = {{"direction_lhs", cert.direction_lhs},
                                  {"direction_rhs", cert.direction_rhs},
                                  {"norm_gap", cert.norm_gap},
                                  {"norm_bound", cert.norm_bound},
                                  {"angle", cert.angle}};
        loss_csv_row(csv, "standard", ls);
        loss_csv_row(csv, "robust", lr);

        if (!R_grid.empty()) {
            const auto gap = disparity_gap(mix, pert, R_grid);
            json rows = json::array();
            std::ostringstream gap_csv;
            gap_csv.precision(17);
            gap_csv << "R,ad_std,ad_rob,gap,monotone_region\n";
            for (const GapPoint& g : gap) {
                rows.push_back({{"R", g.R},
                                {"ad_std", g.ad_std},
                                {"ad_rob", g.ad_rob},
                                {"gap", g.gap},
                                {"monotone_region", g.in_monotone_region}});
                gap_csv << g.R << ',' << g.ad_std << ',' << g.ad_rob << ',' << g.gap
                        << ',' << (g.in_monotone_region ? 1 : 0) << '\n';
            }
            report["disparity_gap"] = rows;
            if (out.want_csv) atomic_write(out.dir / "solve_gap.csv", gap_csv.str());
        }
    } else if (kind == "stable_ic") {
        const double alpha = cfg.number("scenario.alpha");
        const Eigen::VectorXd tp = to_vector(cfg.numbers("scenario.theta_plus"));
        const Eigen::VectorXd tm = to_vector(cfg.numbers("scenario.theta_minus"));
        const Eigen::VectorXd scales =
            cfg.find("scenario.scales")
                ? to_vector(cfg.numbers("scenario.scales"))
                : Eigen::VectorXd(Eigen::VectorXd::Ones(tp.size()));
        SasMixture mix(MultivariateSas::independent(alpha, tp, scales),
                       MultivariateSas::independent(alpha, tm, scales),
                       cfg.number_or("scenario.R", 1.0));
        const PerturbSpec pert = read_perturbation(cfg);
        reject_unknown_keys(cfg);

        const IcSolution sol_std = solve_ic_standard(mix);
        const IcSolution sol_rob = solve_ic_robust(mix, pert);
        const LossReport ls = ic_classwise_losses(mix, sol_std.clf);
        const LossReport lr = ic_classwise_losses(mix, sol_rob.clf, &pert);
        report["standard"] = {{"classifier", to_json(sol_std.clf)},
                              {"losses", to_json(ls)},
                              {"objective", sol_std.value},
                              {"residual", sol_std.residual}};
        report["robust"] = {{"classifier", to_json(sol_rob.clf)},
                            {"losses", to_json(lr)},
                            {"objective", sol_rob.value},
                            {"residual", sol_rob.residual}};
        loss_csv_row(csv, "standard", ls);
        loss_csv_row(csv, "robust", lr);
    } else if (kind == "stable_ec") {
        const double alpha = cfg.number("scenario.alpha");
        const Eigen::VectorXd tp = to_vector(cfg.numbers("scenario.theta_plus"));
        const Eigen::VectorXd tm = to_vector(cfg.numbers("scenario.theta_minus"));
        const Eigen::MatrixXd shape =
            cfg.find("scenario.sigma")
                ? to_matrix(cfg.matrix("scenario.sigma"))
                : Eigen::MatrixXd(Eigen::MatrixXd::Identity(tp.size(), tp.size()));
        SasMixture mix(MultivariateSas::elliptical(alpha, tp, shape),
                       MultivariateSas::elliptical(alpha, tm, shape),
                       cfg.number_or("scenario.R", 1.0));
        // No EC solver: losses are evaluated for a user-supplied classifier.
        LinearClassifier clf{to_vector(cfg.numbers("classifier.w")),
                             cfg.number_or("classifier.b", 0.0)};
        const PerturbSpec pert = read_perturbation(cfg);
        reject_unknown_keys(cfg);

        const LossReport ls = ec_classwise_losses(mix, clf);
        const LossReport lr = ec_classwise_losses(mix, clf, &pert);
        report["classifier"] = to_json(clf);
        report["standard"] = {{"losses", to_json(ls)}};
        report["robust"] = {{"losses", to_json(lr)}};
        loss_csv_row(csv, "standard", ls);
        loss_csv_row(csv, "robust", lr);
    } else if (kind == "cauchy") {
        const Eigen::VectorXd tp = to_vector(cfg.numbers("scenario.theta_plus"));
        const Eigen::VectorXd tm = to_vector(cfg.numbers("scenario.theta_minus"));
        SasMixture mix(
            MultivariateSas::independent(1.0, tp, Eigen::VectorXd::Ones(tp.size())),
            MultivariateSas::independent(1.0, tm, Eigen::VectorXd::Ones(tp.size())),
            cfg.number_or("scenario.R", 1.0));
        const PerturbSpec pert = read_perturbation(cfg);
        reject_unknown_keys(cfg);

        const CauchyAnalysis an = cauchy_analysis(mix, pert);
        report["direction"] = to_json(an.w);
        report["balanced"] = an.balanced;
        report["quadratics"] = {
            {"delta1", an.quads.delta1},
            {"delta2", an.quads.delta2},
            {"d_eps", an.quads.d_eps},
            {"d_zero", an.quads.d_zero},
            {"collapse_guaranteed", an.quads.collapse_guaranteed},
            {"reduce_condition", an.quads.reduce_condition}};
        if (an.quads.b_std) report["quadratics"]["b_std"] = *an.quads.b_std;
        if (an.quads.b_rob) report["quadratics"]["b_rob"] = *an.quads.b_rob;
        report["standard"] = {{"losses", to_json(an.std_losses)}};
        report["robust"] = {{"losses", to_json(an.rob_losses)}};
        loss_csv_row(csv, "standard", an.std_losses);
        loss_csv_row(csv, "robust", an.rob_losses);
    } else {
        throw tomlite::ParseError("unknown scenario.kind '" + kind +
                                  "' (expected gaussian, toy, stable_ic, stable_ec "
                                  "or cauchy)");
    }

    emit(out, "solve", report, csv.str());
    return 0;
}

// --------------------------------------------------------------- verify ----

struct VerifyCheck {
    std::string scenario;
    std::string quantity;
    double theory = 0.0;
    double empirical = 0.0;
    double z = 0.0;
    bool pass = false;
};

void compare_losses(std::vector<VerifyCheck>& checks, const std::string& scenario,
                    const std::string& tag, const LossReport& theory,
                    const EvalReport& mc, double n_plus, double n_minus) {
    const auto push = [&](const std::string& cls, double loss, double acc, double n) {
        const double sigma = std::sqrt(std::max(loss * (1.0 - loss), 1e-12) / n);
        VerifyCheck c;
        c.scenario = scenario;
        c.quantity = tag + "_loss" + cls;
        c.theory = loss;
        c.empirical = 1.0 - acc;
        c.z = (c.empirical - loss) / sigma;
        // half-count continuity correction for the discrete binomial counts
        c.pass = std::abs(c.empirical - loss) < 3.0 * sigma + 0.5 / n;
        checks.push_back(c);
    };
    push("_plus", theory.loss_plus, mc.acc_plus, n_plus);
    push("_minus", theory.loss_minus, mc.acc_minus, n_minus);
}

int cmd_verify(const tomlite::Table& cfg, const Output& out, std::uint64_t seed,
               bool inject_bias) {
    const std::int64_t n_major =
        static_cast<std::int64_t>(cfg.number_or("verify.samples", 200000.0));
    reject_unknown_keys(cfg);
    std::vector<VerifyCheck> checks;
    int idx = 0;
    const double shift = inject_bias ? 0.1 : 0.0;

    // Gaussian x4: closed-form class-wise losses of the standard and robust
    // classifiers against indicator Monte Carlo.
    const struct {
        double R, p, eps;
        bool aniso;
    } gcells[] = {{1.0, 2.0, 0.2, false},
                  {5.0, kInf, 0.15, false},
                  {2.0, 2.0, 0.25, true},
                  {10.0, kInf, 0.1, false}};
    for (const auto& cell : gcells) {
        Eigen::VectorXd tp(3);
        tp << 1.0, 0.5, -0.25;
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(3, 3);
        if (cell.aniso) {
            sigma << 1.5, 0.3, 0.0, 0.3, 0.8, -0.2, 0.0, -0.2, 1.1;
        }
        GaussianMixture mix(tp, -tp, sigma, cell.R);
        PerturbSpec pert;
        pert.p = cell.p;
        pert.epsilon = cell.eps;
        const KktSolution kkt = solve_kkt(mix, pert);
        auto [u, clf_std] = solve_standard(mix);
        auto [v, clf_rob] = solve_robust(mix, pert);
        clf_std.b += shift;
        clf_rob.b += shift;
        const std::string name = "gaussian_" + std::to_string(++idx);
        SampleSet set = sample_mixture(mix, n_major, subseed(seed, idx));
        const double np = static_cast<double>(set.count_plus());
        const double nm = static_cast<double>(set.count_minus());
        // the theorem reports the *clean* class-wise losses of both classifiers
        compare_losses(checks, name, "std", classwise_losses_standard(mix, kkt),
                       empirical_losses(set, clf_std), np, nm);
        compare_losses(checks, name, "rob", classwise_losses_robust(mix, kkt),
                       empirical_losses(set, clf_rob), np, nm);
    }

    // IC-stable x4.
    const struct {
        double alpha, R, p, eps;
    } icells[] = {{1.5, 1.0, 2.0, 0.2},
                  {1.5, 5.0, 2.0, 0.25},
                  {1.8, 2.0, kInf, 0.15},
                  {1.3, 3.0, 2.0, 0.1}};
    for (const auto& cell : icells) {
        Eigen::VectorXd tp(3);
        tp << 1.0, 0.4, -0.3;
        Eigen::VectorXd scales(3);
        scales << 1.0, 0.7, 1.3;
        SasMixture mix(MultivariateSas::independent(cell.alpha, tp, scales),
                       MultivariateSas::independent(cell.alpha, -tp, scales), cell.R);
        PerturbSpec pert;
        pert.p = cell.p;
        pert.epsilon = cell.eps;
        IcSolution sol_std = solve_ic_standard(mix);
        IcSolution sol_rob = solve_ic_robust(mix, pert);
        sol_std.clf.b += shift;
        sol_rob.clf.b += shift;
        const std::string name = "stable_ic_" + std::to_string(++idx - 4);
        SampleSet set = sample_mixture(mix, n_major, subseed(seed, idx));
        const double np = static_cast<double>(set.count_plus());
        const double nm = static_cast<double>(set.count_minus());
        compare_losses(checks, name, "std", ic_classwise_losses(mix, sol_std.clf),
                       empirical_losses(set, sol_std.clf), np, nm);
        compare_losses(checks, name, "rob",
                       ic_classwise_losses(mix, sol_rob.clf, &pert),
                       empirical_losses(set, sol_rob.clf, &pert), np, nm);
    }

    // Cauchy x2: one finite-intercept instance, one guaranteed collapse.
    for (int variant = 0; variant < 2; ++variant) {
        Eigen::VectorXd tp(2);
        double R;
        if (variant == 0) {
            tp << 2.0, 0.3;
            R = 3.0;
        } else {
            tp << 1.0, 0.2;
            R = 20.0;  // R >= 2 + 4 ||tb||_inf^2 -> both intercepts diverge
        }
        SasMixture mix(
            MultivariateSas::independent(1.0, tp, Eigen::VectorXd::Ones(2)),
            MultivariateSas::independent(1.0, -tp, Eigen::VectorXd::Ones(2)), R);
        PerturbSpec pert;
        pert.p = kInf;
        pert.epsilon = 0.2;
        const CauchyAnalysis an = cauchy_analysis(mix, pert);
        const std::string name = "cauchy_" + std::to_string(variant + 1);
        SampleSet set = sample_mixture(mix, n_major, subseed(seed, ++idx));
        const double np = static_cast<double>(set.count_plus());
        const double nm = static_cast<double>(set.count_minus());
        // Collapse reports the b -> -inf limit; stand in with a very
        // negative intercept for the empirical side.
        LinearClassifier clf_std{an.w.w, an.quads.b_std ? *an.quads.b_std : -1e15};
        LinearClassifier clf_rob{an.w.w, an.quads.b_rob ? *an.quads.b_rob : -1e15};
        clf_std.b += shift;
        clf_rob.b += shift;
        // both intercept analyses report clean losses
        compare_losses(checks, name, "std", an.std_losses,
                       empirical_losses(set, clf_std), np, nm);
        compare_losses(checks, name, "rob", an.rob_losses,
                       empirical_losses(set, clf_rob), np, nm);
    }

    // EC x2: fixed classifiers (no EC solver); alpha = 2 doubles as a check
    // of the Gaussian correspondence.
    const double ec_alphas[] = {2.0, 1.5};
    for (double alpha : ec_alphas) {
        Eigen::VectorXd tp(2);
        tp << 1.0, -0.5;
        Eigen::MatrixXd shape(2, 2);
        shape << 1.0, 0.4, 0.4, 0.7;
        SasMixture mix(MultivariateSas::elliptical(alpha, tp, shape),
                       MultivariateSas::elliptical(alpha, -tp, shape), 2.0);
        PerturbSpec pert;
        pert.p = 2.0;
        pert.epsilon = 0.3;
        LinearClassifier clf{shape.ldlt().solve(2.0 * tp), 0.05 + shift};
        const std::string name = "stable_ec_" + (alpha == 2.0 ? std::string("1")
                                                              : std::string("2"));
        SampleSet set = sample_mixture(mix, n_major, subseed(seed, ++idx));
        const double np = static_cast<double>(set.count_plus());
        const double nm = static_cast<double>(set.count_minus());
        LinearClassifier theory_clf{clf.w, clf.b - shift};
        compare_losses(checks, name, "std", ec_classwise_losses(mix, theory_clf),
                       empirical_losses(set, clf), np, nm);
        compare_losses(checks, name, "rob",
                       ec_classwise_losses(mix, theory_clf, &pert),
                       empirical_losses(set, clf, &pert), np, nm);
    }

    int failures = 0;
    json rows = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "scenario,quantity,theory,empirical,z,pass\n";
    for (const VerifyCheck& c : checks) {
        failures += c.pass ? 0 : 1;
        rows.push_back({{"scenario", c.scenario},
                        {"quantity", c.quantity},
                        {"theory", c.theory},
                        {"empirical", c.empirical},
                        {"z", c.z},
                        {"pass", c.pass}});
        csv << c.scenario << ',' << c.quantity << ',' << c.theory << ','
            << c.empirical << ',' << c.z << ',' << (c.pass ? 1 : 0) << '\n';
    }
    json report = {{"samples_per_scenario", n_major},
                   {"seed", seed},
                   {"bias_injected", inject_bias},
                   {"checks", rows},
                   {"failures", failures}};
    emit(out, "verify", report, csv.str());
    std::cout << "verify: " << checks.size() - failures << "/" << checks.size()
              << " checks within 3 sigma\n";
    for (const VerifyCheck& c : checks)
        if (!c.pass)
            std::cout << "  FAIL " << c.scenario << ' ' << c.quantity
                      << " theory=" << c.theory << " empirical=" << c.empirical
                      << " z=" << c.z << '\n';
    return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- sweep ----

int cmd_sweep(const tomlite::Table& cfg, const Output& out, std::uint64_t seed,
              bool seed_given) {
    SweepSpec spec;
    const std::string kind = cfg.text("scenario.kind");
    if (kind == "gaussian")
        spec.kind = SweepSpec::Kind::Gaussian;
    else if (kind == "stable_ic")
        spec.kind = SweepSpec::Kind::StableIc;
    else if (kind == "cauchy")
        spec.kind = SweepSpec::Kind::Cauchy;
    else
        throw tomlite::ParseError("unknown scenario.kind '" + kind +
                                  "' (expected gaussian, stable_ic or cauchy)");
    spec.scenario_id = cfg.text_or("scenario.id", kind);
    spec.theta_plus = to_vector(cfg.numbers("scenario.theta_plus"));
    spec.theta_minus = to_vector(cfg.numbers("scenario.theta_minus"));
    spec.sigma = cfg.find("scenario.sigma")
                     ? to_matrix(cfg.matrix("scenario.sigma"))
                     : Eigen::MatrixXd(Eigen::MatrixXd::Identity(
                           spec.theta_plus.size(), spec.theta_plus.size()));
    spec.alpha = cfg.number_or("scenario.alpha", 2.0);
    spec.R_grid = cfg.numbers("sweep.R_grid");
    spec.epsilon_grid = cfg.numbers("sweep.epsilon_grid");
    std::vector<double> p_grid = cfg.numbers_or("sweep.p_grid", {2.0});
    spec.p_grid = p_grid;
    spec.n_major = static_cast<std::int64_t>(cfg.number_or("sweep.n_major", 100000.0));
    const std::vector<double> cfg_seeds = cfg.numbers_or("sweep.seeds", {1.0});
    if (seed_given) {
        // a --seed override re-derives the whole seed list from one root
        for (std::size_t i = 0; i < cfg_seeds.size(); ++i)
            spec.seeds.push_back(subseed(seed, 1000 + i));
    } else {
        for (double s : cfg_seeds)
            spec.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    reject_unknown_keys(cfg);

    const std::vector<SweepRow> rows = sweep(spec);
    std::ostringstream csv;
    csv.precision(17);
    csv << "scenario_id,R,p,epsilon,seed,acc_plus,acc_minus,acc_overall,ad,ad_gap,"
           "ci_halfwidth\n";
    json jrows = json::array();
    for (const SweepRow& r : rows) {
        csv << r.scenario_id << ',' << r.R << ',' << r.p << ',' << r.epsilon << ','
            << r.seed << ',' << r.eval.acc_plus << ',' << r.eval.acc_minus << ','
            << r.eval.acc_overall << ',' << r.eval.ad << ',' << r.ad_gap << ','
            << r.eval.ci_halfwidth() << '\n';
        jrows.push_back({{"scenario_id", r.scenario_id},
                         {"R", r.R},
                         {"p", r.p},
                         {"epsilon", r.epsilon},
                         {"seed", r.seed},
                         {"acc_plus", r.eval.acc_plus},
                         {"acc_minus", r.eval.acc_minus},
                         {"acc_overall", r.eval.acc_overall},
                         {"ad", r.eval.ad},
                         {"ad_gap", r.ad_gap},
                         {"ci_halfwidth", r.eval.ci_halfwidth()}});
    }

    // mean / sd across seeds per (R, p, epsilon) cell
    json cells = json::array();
    for (double R : spec.R_grid)
        for (double p : p_grid)
            for (double eps : spec.epsilon_grid) {
                double sum = 0, sum2 = 0, gsum = 0, gsum2 = 0;
                int n = 0;
                for (const SweepRow& r : rows)
                    if (r.R == R && r.p == p && r.epsilon == eps) {
                        sum += r.eval.acc_overall;
                        sum2 += r.eval.acc_overall * r.eval.acc_overall;
                        gsum += r.ad_gap;
                        gsum2 += r.ad_gap * r.ad_gap;
                        ++n;
                    }
                if (n == 0) continue;
                const double mean = sum / n;
                const double gmean = gsum / n;
                cells.push_back(
                    {{"R", R},
                     {"p", p},
                     {"epsilon", eps},
                     {"runs", n},
                     {"acc_overall_mean", mean},
                     {"acc_overall_sd",
                      n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * mean * mean) / (n - 1)))
                            : 0.0},
                     {"ad_gap_mean", gmean},
                     {"ad_gap_sd",
                      n > 1 ? std::sqrt(std::max(0.0, (gsum2 - n * gmean * gmean) / (n - 1)))
                            : 0.0}});
            }
    json report = {{"scenario_id", spec.scenario_id},
                   {"rows", jrows},
                   {"cells", cells}};
    emit(out, "sweep", report, csv.str());
    return 0;
}

// ---------------------------------------------------------------- ridge ----

int cmd_ridge(const tomlite::Table& cfg, const Output& out, std::uint64_t seed) {
    const Eigen::VectorXd mu1 = to_vector(cfg.numbers("ridge.mu1"));
    const Eigen::VectorXd mu2 = to_vector(cfg.numbers("ridge.mu2"));
    RidgeScenario sc(mu1, mu2, cfg.number("ridge.k1"), cfg.number("ridge.k2"),
                     cfg.number("ridge.lambda_prime"),
                     to_vector(cfg.numbers("ridge.beta_star")),
                     cfg.find("ridge.sigma_pop")
                         ? to_matrix(cfg.matrix("ridge.sigma_pop"))
                         : Eigen::MatrixXd());
    const double noise = cfg.number_or("ridge.noise_variance", 0.0);
    reject_unknown_keys(cfg);

    std::ostringstream csv;
    csv.precision(17);
    csv << "quantity,value\n";
    json report;

    const Eigen::MatrixXd S = sc.ideal_gram();
    const DisparityReport disp = general_gram_disparity(sc, S);
    report["g1"] = disp.g1;
    report["g2"] = disp.g2;
    report["g1_dense"] = disp.g1_dense;
    report["g2_dense"] = disp.g2_dense;
    report["envelope1"] = disp.envelope1;
    report["envelope2"] = disp.envelope2;
    csv << "g1," << disp.g1 << "\ng2," << disp.g2 << '\n';

    if (std::abs(sc.mean_inner()) < 1e-12 * std::sqrt(sc.n1() * sc.n2())) {
        const ToyDisparity toy = toy_orthogonal_disparity(sc);
        report["toy_term1"] = toy.term1;
        report["toy_term2"] = toy.term2;
        csv << "toy_term1," << toy.term1 << "\ntoy_term2," << toy.term2 << '\n';
    }

    if (noise > 0.0) {
        Rng rng(subseed(seed, 0xa1d9e));
        const GramPair pair = sample_gram(sc, noise, rng);
        const TaylorReport taylor = taylor_first_order(sc, pair.S, pair.S_prime);
        // the spectral path is tied to the ideal decomposition; the sampled
        // gram goes through the dense solve
        const DisparityReport sampled = general_gram_disparity(sc, pair.S_prime);
        report["sampled"] = {{"g1", sampled.g1_dense},
                             {"g2", sampled.g2_dense},
                             {"g_tilde_1", taylor.g_tilde_1},
                             {"g_tilde_2", taylor.g_tilde_2}};
        csv << "g1_sampled," << sampled.g1_dense << "\ng2_sampled," << sampled.g2_dense
            << '\n';
        csv << "g_tilde_1," << taylor.g_tilde_1 << "\ng_tilde_2," << taylor.g_tilde_2
            << '\n';
    }

    emit(out, "ridge", report, csv.str());
    return 0;
}

// ---------------------------------------------------------------- train ----

int cmd_train(const tomlite::Table& cfg, const Output& out, std::uint64_t seed,
              bool seed_given) {
    const std::string kind = cfg.text("scenario.kind");
    const Eigen::VectorXd tp = to_vector(cfg.numbers("scenario.theta_plus"));
    const Eigen::VectorXd tm = to_vector(cfg.numbers("scenario.theta_minus"));
    const double R = cfg.number_or("scenario.R", 1.0);
    const double alpha = cfg.number_or("scenario.alpha", 2.0);
    const Eigen::MatrixXd sigma =
        cfg.find("scenario.sigma") ? to_matrix(cfg.matrix("scenario.sigma"))
                                   : Eigen::MatrixXd(Eigen::MatrixXd::Identity(
                                         tp.size(), tp.size()));

    TrainConfig train;
    const std::string attack = cfg.text_or("train.attack", "none");
    if (attack == "none")
        train.attack = TrainConfig::Attack::None;
    else if (attack == "fgm")
        train.attack = TrainConfig::Attack::Fgm;
    else if (attack == "pgd")
        train.attack = TrainConfig::Attack::Pgd;
    else
        throw tomlite::ParseError("train.attack must be none, fgm or pgd");
    train.pert.p = cfg.norm_index("train.p", 2.0);
    train.pert.epsilon = cfg.number_or("train.epsilon", 0.0);
    train.lr = cfg.number_or("train.lr", 0.05);
    train.batch = static_cast<int>(cfg.number_or("train.batch", 64.0));
    train.max_epochs = static_cast<int>(cfg.number_or("train.max_epochs", 400.0));
    train.patience = static_cast<int>(cfg.number_or("train.patience", 50.0));
    train.pgd_steps = static_cast<int>(cfg.number_or("train.pgd_steps", 50.0));
    const std::int64_t n_major =
        static_cast<std::int64_t>(cfg.number_or("train.n_major", 50000.0));
    std::vector<std::uint64_t> seeds;
    for (double s : cfg.numbers_or("train.seeds", {1.0, 2.0, 3.0, 4.0, 5.0}))
        seeds.push_back(static_cast<std::uint64_t>(s));
    if (seed_given) {
        for (std::size_t i = 0; i < seeds.size(); ++i)
            seeds[i] = subseed(seed, 2000 + i);
    }
    reject_unknown_keys(cfg);

    const auto sample = [&](std::uint64_t s) -> SampleSet {
        if (kind == "gaussian")
            return sample_mixture(GaussianMixture(tp, tm, sigma, R), n_major, s);
        if (kind == "stable_ic")
            return sample_mixture(
                SasMixture(MultivariateSas::independent(
                               alpha, tp, Eigen::VectorXd::Ones(tp.size())),
                           MultivariateSas::independent(
                               alpha, tm, Eigen::VectorXd::Ones(tp.size())),
                           R),
                n_major, s);
        throw tomlite::ParseError("unknown scenario.kind '" + kind +
                                  "' (expected gaussian or stable_ic)");
    };

    std::ostringstream csv;
    csv.precision(17);
    csv << "seed,attack,best_epoch,acc_plus,acc_minus,acc_overall,ad\n";
    json runs = json::array();
    double acc_sum = 0, acc_sum2 = 0, ad_sum = 0, ad_sum2 = 0;
    const PerturbSpec* eval_pert =
        train.attack == TrainConfig::Attack::None ? nullptr : &train.pert;
    for (std::uint64_t s : seeds) {
        SampleSet data = sample(subseed(s, 1));
        TrainResult res = adv_train_linear(data, train, subseed(s, 2));
        SampleSet test = sample(subseed(s, 3));
        EvalReport eval = empirical_losses(test, res.clf, eval_pert);
        csv << s << ',' << attack << ',' << res.best_epoch << ',' << eval.acc_plus
            << ',' << eval.acc_minus << ',' << eval.acc_overall << ',' << eval.ad
            << '\n';
        runs.push_back({{"seed", s},
                        {"best_epoch", res.best_epoch},
                        {"acc_plus", eval.acc_plus},
                        {"acc_minus", eval.acc_minus},
                        {"acc_overall", eval.acc_overall},
                        {"ad", eval.ad}});
        acc_sum += eval.acc_overall;
        acc_sum2 += eval.acc_overall * eval.acc_overall;
        ad_sum += eval.ad;
        ad_sum2 += eval.ad * eval.ad;
    }
    const double n = static_cast<double>(seeds.size());
    const double acc_mean = acc_sum / n;
    const double ad_mean = ad_sum / n;
    const double acc_sd =
        n > 1 ? std::sqrt(std::max(0.0, (acc_sum2 - n * acc_mean * acc_mean) / (n - 1)))
              : 0.0;
    const double ad_sd =
        n > 1 ? std::sqrt(std::max(0.0, (ad_sum2 - n * ad_mean * ad_mean) / (n - 1)))
              : 0.0;
    csv << "mean," << attack << ",," << "" << ',' << "" << ',' << acc_mean << ','
        << ad_mean << '\n';
    csv << "sd," << attack << ",," << "" << ',' << "" << ',' << acc_sd << ',' << ad_sd
        << '\n';
    json report = {{"scenario", kind},
                   {"attack", attack},
                   {"runs", runs},
                   {"acc_overall_mean", acc_mean},
                   {"acc_overall_sd", acc_sd},
                   {"ad_mean", ad_mean},
                   {"ad_sd", ad_sd}};
    emit(out, "train", report, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"accuracy-disparity experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 1;
    bool seed_given = false;
    bool inject_bias = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "TOML config file")->required();
        sub->add_option("--seed", seed, "override the top-level seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", format, "csv or json (default both)")
            ->check(CLI::IsMember({"csv", "json"}));
    };
    CLI::App* solve = app.add_subcommand("solve", "closed-form classifiers and losses");
    CLI::App* verify =
        app.add_subcommand("verify", "theory-vs-Monte-Carlo regression suite");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid sweep over R/epsilon/p/seed");
    CLI::App* ridge = app.add_subcommand("ridge", "two-group ridge disparity report");
    CLI::App* train = app.add_subcommand("train", "adversarial logistic training runs");
    for (CLI::App* sub : {solve, verify, sweep_cmd, ridge, train}) add_common(sub);
    verify->add_flag("--inject-bias", inject_bias,
                     "debug: shift every intercept by 0.1 (must fail)");

    CLI11_PARSE(app, argc, argv);

    try {
        const tomlite::Table cfg = tomlite::parse_file(config_path);
        Output out;
        // precedence: environment override, then --out, then the config
        const char* env_dir = std::getenv("ADROB_OUT");
        if (env_dir && *env_dir)
            out.dir = env_dir;
        else if (!out_dir.empty())
            out.dir = out_dir;
        else
            out.dir = cfg.text_or("output.dir", ".");
        if (format == "csv") out.want_json = false;
        if (format == "json") out.want_csv = false;
        if (!seed_given && cfg.find("seed"))
            seed = static_cast<std::uint64_t>(cfg.number("seed"));
        else
            cfg.find("seed");  // consume so it is never flagged as unknown
        std::filesystem::create_directories(out.dir);

        if (app.got_subcommand(solve)) return cmd_solve(cfg, out);
        if (app.got_subcommand(verify)) return cmd_verify(cfg, out, seed, inject_bias);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(cfg, out, seed, seed_given);
        if (app.got_subcommand(ridge)) return cmd_ridge(cfg, out, seed);
        if (app.got_subcommand(train)) return cmd_train(cfg, out, seed, seed_given);
        return 2;
    } catch (const tomlite::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "numerical failure: " << e.what()
                  << " (residual=" << e.residual << ")\n";
        return 3;
    } catch (const QuadratureError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
