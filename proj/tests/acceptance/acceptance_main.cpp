// Acceptance suite: one check per release criterion, each printing a
// [PASS]/[FAIL] line with the measured numbers. Exit code 0 only when every
// criterion holds. Checks with runtime caps fail when they run over.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <algorithm>

#include "cvqc/cost_landscape.hpp"
#include "cvqc/gaussian_model.hpp"
#include "cvqc/homodyne.hpp"
#include "cvqc/param_estimation.hpp"
#include "cvqc/qca.hpp"
#include "cvqc/rng.hpp"
#include "cvqc/util.hpp"
#include "cvqc/verify.hpp"
#include "cvqc/wigner_oracle.hpp"

using namespace cvqc;

namespace {

constexpr std::uint64_t kSeed = 20240901;
unsigned g_workers = 0;
int g_failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// Matched learning rate, noise, and budget for the squeezing-ladder runs.
// The 2 rad start sits off the outer plateau so the gorge dynamics, not the
// shared plateau escape, set the time-to-solution.
QcaConfig study_config() {
    QcaConfig cfg;
    cfg.model = ModelParams::ideal(0.74, 2.0);
    cfg.eta_initial = 0.35;
    cfg.max_iterations = 550;
    cfg.fd_step = 0.05;
    cfg.samples_per_iteration = 100000;
    cfg.noise.gain_m = 1.0;
    cfg.noise.mean_offset = 0.1;
    cfg.noise.sigma_e_sq = 0.2;
    cfg.seed = kSeed;
    return cfg;
}

void criterion_1_oracle_equivalence() {
    Timer timer;
    const VerifyCheck check = oracle_equivalence_check(
        [](double x, const ModelParams& p) { return marginal_diff_density(x, p); }, kSeed, 50);
    const double elapsed = timer.seconds();
    report(1, "marginal density matches the Wigner integration oracle",
           check.pass && elapsed < 120.0,
           fmt("worst |closed - oracle| = %.3e over 50 draws, tol 1e-6, %.1f s (cap 120 s)",
               check.measured, elapsed));
}

void criterion_2_analytic_anchors() {
    double worst = std::abs(cost(ModelParams::vacuum()) + 1.0 / std::sqrt(pi));
    for (double r : {0.18, 0.35, 0.74})
        worst = std::max(worst, std::abs(diff_quadrature_variance(ModelParams::ideal(r)) -
                                         0.5 * std::exp(-2.0 * r)));
    report(2, "analytic anchors (vacuum cost, ideal minimum variance)", worst <= 1e-12,
           fmt("worst deviation %.3e, tol 1e-12", worst));
}

void criterion_3_expansions() {
    double worst_f = 0.0;
    const double h = 1e-3;
    for (double n : {0.03, 0.1, 0.5, 1.0}) {
        const double r = std::asinh(std::sqrt(n));
        const double second = (normalized_cost(ModelParams::ideal(r, h)) +
                               normalized_cost(ModelParams::ideal(r, -h)) -
                               2.0 * normalized_cost(ModelParams::ideal(r, 0.0))) /
                              (h * h);
        worst_f = std::max(worst_f,
                           std::abs(second - quadratic_coefficient_f(n)) /
                               quadratic_coefficient_f(n));
    }

    double worst_quartic = 0.0;
    const double hq = 1e-2;
    for (double alpha : {0.1, 0.5}) {
        const double c4 =
            (seeded_cost(SeededParams{0.0, alpha, 0.0, hq}) + 1.0) / (hq * hq * hq * hq);
        worst_quartic =
            std::max(worst_quartic, std::abs(c4 - 0.5 * alpha * alpha) / (0.5 * alpha * alpha));
    }
    report(3, "quadratic and seeded quartic expansion coefficients",
           worst_f <= 1e-4 && worst_quartic <= 1e-3,
           fmt("f(N) rel err %.3e (tol 1e-4); quartic rel err %.3e (tol 1e-3)", worst_f,
               worst_quartic));
}

void criterion_4_pipeline_round_trip() {
    Timer timer;
    const std::size_t n = 1000000;
    const int trials = 100;
    bool recovered = true;
    double worst_recovery = 0.0;
    int agreements = 0;

    for (double r : {0.18, 0.35, 0.74}) {
        const ModelParams p = ModelParams::ideal(r, 0.3);
        const double truth = diff_quadrature_variance(p);
        std::vector<int> agree(trials, 0);
        std::vector<double> recovery(trials, 0.0);
        parallel_for(trials, g_workers, [&](std::size_t t) {
            const auto x =
                sample_diff_quadrature(p, n, derive_seed(kSeed, t, static_cast<std::uint64_t>(r * 1000)));
            const HomodyneTrace trace = synthesize_voltage_trace(
                x, 0.9, 0.1, 0.1 * 0.81, derive_seed(kSeed, t + 1000, static_cast<std::uint64_t>(r * 1000)));
            const CostEstimate direct = process_trace_direct(trace);
            const CostEstimate hist = process_trace_histogram(trace);
            recovery[t] = std::max(std::abs(direct.variance_x_minus - truth),
                                   std::abs(hist.variance_x_minus - truth)) /
                          truth;
            const double combined = std::sqrt(direct.std_error * direct.std_error +
                                              hist.std_error * hist.std_error);
            agree[t] = std::abs(direct.cost - hist.cost) <= 3.0 * combined ? 1 : 0;
        });
        for (int t = 0; t < trials; ++t) {
            worst_recovery = std::max(worst_recovery, recovery[static_cast<std::size_t>(t)]);
            agreements += agree[static_cast<std::size_t>(t)];
        }
        recovered = recovered && worst_recovery <= 0.01;
    }
    const double elapsed = timer.seconds();
    report(4, "trace pipelines recover the closed-form variance and agree",
           recovered && agreements >= 285 && elapsed < 300.0,
           fmt("worst recovery error %.3e (tol 1e-2); agreement %d/300 (need >= 285); %.1f s "
               "(cap 300 s)",
               worst_recovery, agreements, elapsed));
}

void criterion_5_parameter_recovery() {
    // Exact inversion over random physical draws on the invertible branch.
    Rng rng(derive_seed(kSeed, 5));
    double worst_r = 0.0;
    for (int i = 0; i < 1000; ++i) {
        ModelParams p;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            p.r = rng.uniform(0.0, 1.5);
            p.epsilon = rng.uniform(0.3, 1.0);
            p.epsilon_prime = rng.uniform(0.3, 1.0);
            p.n_b_prime = rng.uniform(0.0, 2.0);
            const QuadraticCoeffs q = quadratic_coeffs(p.epsilon, p.epsilon_prime, p.n_in(), 1.0);
            if (0.5 * std::exp(-2.0 * p.r) >= 1.05 * std::sqrt(q.c / q.a)) break;
        }
        const double v = diff_quadrature_variance(p.with_delta_phi(0.0));
        worst_r = std::max(worst_r,
                           std::abs(solve_r(p.epsilon, p.epsilon_prime, p.n_in(), v) - p.r));
    }

    // Bounded fit study at the reference truth, 0.5% multiplicative noise.
    ModelParams truth;
    truth.r = 0.74;
    truth.epsilon = 0.77;
    truth.epsilon_prime = 0.6;
    truth.n_b_prime = 0.4;  // N_in = 0.9
    std::vector<double> grid;
    for (int i = 0; i < 81; ++i) grid.push_back(-pi + 2.0 * pi * i / 80.0);
    const LandscapeTable clean = landscape_sweep(truth, grid);

    const int trials = 50;
    std::vector<int> ok(trials, 0);
    parallel_for(trials, g_workers, [&](std::size_t t) {
        Rng noise(derive_seed(kSeed, 50 + t));
        LandscapeTable data = clean;
        for (auto& row : data.rows) {
            const double factor = 1.0 + 0.005 * noise.normal();
            row.cost *= factor;
            row.variance = 1.0 / (2.0 * pi * row.cost * row.cost);
        }
        const FitResult fit = fit_cost_model(data, FitOptions{});
        const bool good = std::abs(fit.epsilon_prime - 0.6) <= 0.05 * 0.6 &&
                          std::abs(fit.n_in - 0.9) <= 0.05 * 0.9;
        ok[t] = good ? 1 : 0;
    });
    int recovered = 0;
    for (int v : ok) recovered += v;

    report(5, "squeezing inversion and bounded landscape fit recovery",
           worst_r <= 1e-8 && recovered >= 45,
           fmt("worst |r - r_hat| = %.3e over 1000 draws (tol 1e-8); fit recovery %d/50 "
               "(need >= 45)",
               worst_r, recovered));
}

std::vector<SqueezingStudyRow> g_study_rows;

void run_squeezing_study() {
    const std::vector<double> rs{0.18, 0.35, 0.74};
    g_study_rows = squeezing_study(study_config(), rs, 20, g_workers,
                                   /*randomize_init_sign=*/true);
}

void criterion_6_squeezing_trends(double elapsed) {

    bool t_decreasing = true, sigma_decreasing = true;
    for (std::size_t i = 1; i < g_study_rows.size(); ++i) {
        t_decreasing = t_decreasing &&
                       g_study_rows[i].t_opt_median < g_study_rows[i - 1].t_opt_median;
        sigma_decreasing = sigma_decreasing && g_study_rows[i].precision.std_of_means <
                                                   g_study_rows[i - 1].precision.std_of_means;
    }
    const double speedup = g_study_rows.front().t_opt_median / g_study_rows.back().t_opt_median;
    const double precision_ratio =
        g_study_rows.front().precision.std_of_means / g_study_rows.back().precision.std_of_means;

    report(6, "time-to-solution and precision improve with squeezing",
           t_decreasing && sigma_decreasing && speedup >= 2.0 && precision_ratio >= 2.0 &&
               elapsed < 900.0,
           fmt("t_opt medians {%.0f, %.0f, %.0f} speedup %.2f (need >= 2); sigma {%.4f, %.4f, "
               "%.4f} ratio %.2f (need >= 2); %.0f s (cap 900 s)",
               g_study_rows[0].t_opt_median, g_study_rows[1].t_opt_median,
               g_study_rows[2].t_opt_median, speedup, g_study_rows[0].precision.std_of_means,
               g_study_rows[1].precision.std_of_means, g_study_rows[2].precision.std_of_means,
               precision_ratio, elapsed));
}

void criterion_7_unbiasedness() {
    bool unbiased = true;
    std::string detail;
    for (const SqueezingStudyRow& row : g_study_rows) {
        const double se =
            row.precision.std_of_means / std::sqrt(static_cast<double>(row.precision.n_runs));
        unbiased = unbiased && std::abs(row.precision.mean_of_means) <= 2.0 * se;
        detail += fmt("r=%.2f mean=%.2e (2se=%.2e) ", row.r, row.precision.mean_of_means,
                      2.0 * se);
    }
    report(7, "post-convergence phase estimates are unbiased", unbiased, detail);
}

// Two-sample Kolmogorov-Smirnov at the 5% level.
bool ks_compatible(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d <= 1.358 * std::sqrt((na + nb) / (na * nb));
}

void criterion_8_robustness() {
    // Three initial control phases against a fixed target, then three
    // targets against a fixed initial control phase.
    struct Scenario {
        double phi_0;
        double phi_c;
    };
    std::vector<Scenario> scenarios;
    for (double phi_c : {pi, 0.78 * pi, 0.55 * pi}) scenarios.push_back({0.0, phi_c});
    for (double phi_0 : {0.0, 0.33 * pi, 0.49 * pi}) scenarios.push_back({phi_0, pi});

    QcaConfig base = study_config();
    base.max_iterations = 700;  // the antipodal start needs noise to break symmetry

    std::vector<std::optional<double>> means(scenarios.size());
    std::vector<int> converged(scenarios.size(), 0);
    std::vector<std::vector<double>> settled(scenarios.size());
    parallel_for(scenarios.size(), g_workers, [&](std::size_t i) {
        QcaConfig cfg = base;
        cfg.model.phi_0 = scenarios[i].phi_0;
        cfg.model.phi_c = scenarios[i].phi_c;
        cfg.seed = derive_seed(kSeed, i, 0xE0);
        const QcaRunRecord record = qca_run(cfg);
        converged[i] = record.converged() ? 1 : 0;
        if (record.converged()) {
            means[i] = record.post_convergence_mean_dphi;
            // Thinned post-convergence |dphi| samples (autocorrelation dies
            // off well within 25 iterations at this learning rate).
            for (std::size_t k = *record.convergence_index + 1; k < record.iterations.size();
                 k += 25)
                settled[i].push_back(std::abs(record.iterations[k].delta_phi));
        }
    });

    int n_converged = 0;
    std::vector<double> pooled;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        n_converged += converged[i];
        if (means[i]) pooled.push_back(*means[i]);
    }
    const PrecisionStats stats = aggregate_precision(pooled, scenarios.size() - pooled.size());
    const double reference = g_study_rows.back().precision.std_of_means;  // same r = 0.74
    const bool sigma_ok =
        stats.std_of_means <= 2.0 * reference && stats.std_of_means >= reference / 2.0;

    // Initialization independence: settled |dphi| distributions of the
    // varied-control group vs the varied-target group.
    std::vector<double> group_a, group_b;
    for (std::size_t i = 0; i < 3; ++i)
        group_a.insert(group_a.end(), settled[i].begin(), settled[i].end());
    for (std::size_t i = 3; i < 6; ++i)
        group_b.insert(group_b.end(), settled[i].begin(), settled[i].end());
    const bool ks_ok = ks_compatible(group_a, group_b);

    report(8, "arbitrary targets and initial phases converge consistently",
           n_converged == 6 && sigma_ok && ks_ok,
           fmt("converged %d/6; pooled sigma %.4f vs matched-r study %.4f (factor-2 band); "
               "scenario groups KS-compatible at 5%%: %s",
               n_converged, stats.std_of_means, reference, ks_ok ? "yes" : "no"));
}

void criterion_9_barren_plateau() {
    QcaConfig cfg = study_config();
    cfg.samples_per_iteration = 20000;
    cfg.max_iterations = 300;

    QcaConfig low = cfg;
    low.model.r = 0.74;
    const PlateauProbeResult tame =
        barren_plateau_probe(low, 50, InitPolicy::fixed_delta_phi, 3.0, g_workers);

    QcaConfig high = cfg;
    high.model.r = 3.0;
    const PlateauProbeResult flat =
        barren_plateau_probe(high, 40, InitPolicy::uniform_random, 3.0, g_workers);

    report(9, "flat high-energy landscapes defeat random initialization",
           tame.failure_fraction <= 0.02 && flat.failure_fraction >= 0.5,
           fmt("r=0.74 from 3 rad: failures %.3f (<= 0.02); r=3 random init: failures %.3f "
               "(>= 0.5)",
               tame.failure_fraction, flat.failure_fraction));
}

void criterion_10_adaptive_schedule() {
    QcaConfig base = study_config();
    base.samples_per_iteration = 10000;
    base.max_iterations = 300;

    const std::vector<AdaptiveStage> schedule{
        AdaptiveStage{0.18, 0.35, 200, {}},
        AdaptiveStage{2.0, 3e-4, 150, {}},
    };

    const int seeds = 100;
    std::vector<int> adaptive_ok(seeds, 0), direct_ok(seeds, 0);
    parallel_for(seeds, g_workers, [&](std::size_t s) {
        Rng rng(derive_seed(kSeed, s, 0xAD));
        const double dphi0 = rng.uniform(-pi, pi);

        QcaConfig direct = base;
        direct.model.r = 2.0;
        direct.eta_initial = 3e-4;
        direct.model.phi_c = direct.model.phi_0 + dphi0;
        direct.seed = derive_seed(kSeed, s, 0xD1);
        direct_ok[s] = qca_run(direct).converged() ? 1 : 0;

        QcaConfig staged = base;
        staged.model.phi_c = staged.model.phi_0 + dphi0;
        staged.seed = derive_seed(kSeed, s, 0xD2);
        adaptive_ok[s] = !adaptive_run(staged, schedule).failed_to_train ? 1 : 0;
    });

    int adaptive_wins = 0, direct_wins = 0;
    for (int s = 0; s < seeds; ++s) {
        adaptive_wins += adaptive_ok[static_cast<std::size_t>(s)];
        direct_wins += direct_ok[static_cast<std::size_t>(s)];
    }
    report(10, "staged squeezing beats direct high-squeezing training",
           adaptive_wins >= direct_wins,
           fmt("adaptive success %d/100 vs direct %d/100 (paired seeds)", adaptive_wins,
               direct_wins));
}

void criterion_11_aic() {
    const double hand = std::abs(aic(2, 10, 10.0) - 32.378770664093453);

    FitResult a, b;
    a.aic = 30.0;
    a.n_points = 40;
    b.aic = 40.0;
    b.n_points = 40;
    const ModelComparison wired = compare_models(std::vector<FitResult>{a, b});
    const bool flag_ok = wired.best == 0 && wired.significantly_less_supported[1] &&
                         !wired.significantly_less_supported[0];

    // Model recovery: data from the two-parameter model; the two-parameter
    // fit must win the AIC comparison against the nested three-parameter one.
    ModelParams truth;
    truth.r = 0.6;
    truth.epsilon = 0.77;
    truth.epsilon_prime = 0.55;
    truth.n_b_prime = 0.6;
    std::vector<double> grid;
    for (int i = 0; i < 61; ++i) grid.push_back(-pi + 2.0 * pi * i / 60.0);
    const LandscapeTable clean = landscape_sweep(truth, grid);

    const int trials = 50;
    std::vector<int> ok(trials, 0);
    parallel_for(trials, g_workers, [&](std::size_t t) {
        Rng noise(derive_seed(kSeed, 900 + t));
        LandscapeTable data = clean;
        for (auto& row : data.rows) row.cost *= 1.0 + 0.005 * noise.normal();
        const double v_est = estimate_min_variance(data);
        SeedNoiseCostModel two(0.77, v_est);
        NoisyReadoutCostModel three(0.77, v_est);
        const FitResult f2 = fit_parametric(two, data, 8);
        const FitResult f3 = fit_parametric(three, data, 8);
        ok[t] = compare_models(std::vector<FitResult>{f2, f3}).best == 0 ? 1 : 0;
    });
    int correct = 0;
    for (int v : ok) correct += v;

    report(11, "AIC value, selection rate, and the delta >= 10 flag",
           hand <= 1e-4 && flag_ok && correct >= 45,
           fmt("hand-value deviation %.2e (tol 1e-4); flag wiring %s; true model selected "
               "%d/50 (need >= 45)",
               hand, flag_ok ? "ok" : "broken", correct));
}

}  // namespace

int main(int argc, char** argv) {
    std::optional<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
        if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc)
            g_workers = static_cast<unsigned>(std::atoi(argv[++i]));
    }

    Timer total;
    auto want = [&](int id) { return !only || *only == id; };

    if (want(1)) criterion_1_oracle_equivalence();
    if (want(2)) criterion_2_analytic_anchors();
    if (want(3)) criterion_3_expansions();
    if (want(4)) criterion_4_pipeline_round_trip();
    if (want(5)) criterion_5_parameter_recovery();
    if (want(6) || want(7) || want(8)) {
        Timer timer;
        run_squeezing_study();
        if (want(6)) criterion_6_squeezing_trends(timer.seconds());
    }
    if (want(7)) criterion_7_unbiasedness();
    if (want(8)) criterion_8_robustness();
    if (want(9)) criterion_9_barren_plateau();
    if (want(10)) criterion_10_adaptive_schedule();
    if (want(11)) criterion_11_aic();

    std::printf("%s: %d failure(s), %.0f s total\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures, total.seconds());
    return g_failures == 0 ? 0 : 1;
}
