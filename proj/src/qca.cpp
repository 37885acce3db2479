#include "cvqc/qca.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "cvqc/cost_landscape.hpp"
#include "cvqc/gaussian_model.hpp"
#include "cvqc/rng.hpp"
#include "cvqc/stats.hpp"
#include "cvqc/util.hpp"

namespace cvqc {

namespace {

constexpr std::uint64_t kSigmaTag = 0x51;
constexpr std::uint64_t kEvalTag = 0x45;
constexpr std::uint64_t kGradTag = 0x47;
constexpr std::uint64_t kInitTag = 0x49;

}  // namespace

CostEstimate MeasuredCostEvaluator::evaluate(const ModelParams& params,
                                             std::uint64_t eval_seed) const {
    return cost_evaluator(params, n_samples_, noise_, eval_seed);
}

CostEstimate AnalyticCostEvaluator::evaluate(const ModelParams& params, std::uint64_t) const {
    CostEstimate est;
    est.variance_x_minus = diff_quadrature_variance(params);
    est.cost = cost(params);
    est.n_samples = 0;
    est.std_error = 0.0;
    est.method = PipelineMethod::direct_variance;
    return est;
}

GradientEstimate estimate_gradient(const CostEvaluator& evaluator, const ModelParams& at,
                                   double fd_step, std::uint64_t seed) {
    if (!(fd_step > 0.0)) throw std::invalid_argument("estimate_gradient: fd_step must be > 0");
    ModelParams plus = at;
    plus.phi_c = at.phi_c + fd_step;
    ModelParams minus = at;
    minus.phi_c = at.phi_c - fd_step;

    const CostEstimate up = evaluator.evaluate(plus, derive_seed(seed, 1));
    const CostEstimate down = evaluator.evaluate(minus, derive_seed(seed, 2));

    GradientEstimate g;
    g.value = (up.cost - down.cost) / (2.0 * fd_step);
    g.std_error =
        std::sqrt(up.std_error * up.std_error + down.std_error * down.std_error) / (2.0 * fd_step);
    return g;
}

void QcaConfig::validate() const {
    model.validate();
    if (!(eta_initial > 0.0)) throw std::invalid_argument("QcaConfig: eta_initial must be > 0");
    if (!(eta_post_factor > 0.0))
        throw std::invalid_argument("QcaConfig: eta_post_factor must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("QcaConfig: max_iterations must be >= 1");
    if (!(fd_step > 0.0)) throw std::invalid_argument("QcaConfig: fd_step must be > 0");
    if (samples_per_iteration < 1000)
        throw std::invalid_argument("QcaConfig: samples_per_iteration must be >= 1000");
    if (!(convergence_sigma_multiple > 0.0))
        throw std::invalid_argument("QcaConfig: convergence_sigma_multiple must be > 0");
}

void QcaRunRecord::write_csv(std::ostream& out) const {
    out << "iteration,phi_c_rad,delta_phi_rad,cost,cost_stderr,gradient,eta\n";
    for (const QcaIteration& it : iterations) {
        out << it.index << ',' << format_double(it.phi_c) << ',' << format_double(it.delta_phi)
            << ',' << format_double(it.cost) << ',' << format_double(it.cost_stderr) << ','
            << format_double(it.gradient) << ',' << format_double(it.eta) << '\n';
    }
}

std::string QcaRunRecord::summary_json() const {
    nlohmann::json j;
    j["converged"] = converged();
    if (t_opt)
        j["t_opt"] = *t_opt;
    else
        j["t_opt"] = nullptr;
    if (converged())
        j["post_convergence_mean_dphi"] = post_convergence_mean_dphi;
    else
        j["post_convergence_mean_dphi"] = nullptr;
    j["failed_to_train"] = failed_to_train;
    if (abort_reason) j["abort_reason"] = *abort_reason;
    return j.dump(2);
}

QcaRunRecord qca_run(const QcaConfig& config, const CostEvaluator& evaluator) {
    config.validate();

    const ModelParams at_minimum = config.model.with_delta_phi(0.0);
    const double theoretical_min = cost(at_minimum);

    QcaRunRecord record;
    record.iterations.reserve(config.max_iterations);

    double sigma;
    if (config.convergence_sigma_override) {
        sigma = *config.convergence_sigma_override;
    } else {
        // Empirical spread of the cost estimator at the minimum, from a few
        // independent calibration windows. Near the noise floor the
        // propagated per-window error bar diverges as the variance estimate
        // approaches zero (and windows can fail outright), so the scale is
        // taken as a median absolute deviation of the measured costs; a
        // chain that cannot resolve the squeezed variance at all aborts.
        std::vector<double> costs, errors;
        for (std::uint64_t i = 0; i < 7; ++i) {
            try {
                const CostEstimate est =
                    evaluator.evaluate(at_minimum, derive_seed(config.seed, kSigmaTag, i));
                costs.push_back(est.cost);
                errors.push_back(est.std_error);
            } catch (const std::exception&) {
            }
        }
        if (costs.size() < 3) {
            record.abort_reason = "convergence calibration failed: variance unresolvable";
            record.failed_to_train = true;
            record.final_phi_c = config.model.phi_c;
            return record;
        }
        const double center = median(costs);
        std::vector<double> deviations;
        deviations.reserve(costs.size());
        for (double c : costs) deviations.push_back(std::abs(c - center));
        sigma = 1.4826 * median(std::move(deviations));
        if (sigma == 0.0) sigma = median(std::move(errors));

        // A band as deep as the landscape itself cannot certify convergence.
        const double depth = cost(config.model.with_delta_phi(pi)) - theoretical_min;
        if (config.convergence_sigma_multiple * sigma >= 0.9 * depth) {
            record.abort_reason = "convergence band spans the whole landscape";
            record.failed_to_train = true;
            record.final_phi_c = config.model.phi_c;
            return record;
        }
    }
    const double threshold = theoretical_min + config.convergence_sigma_multiple * sigma;

    double phi = config.model.phi_c;  // descent runs on the unwrapped real line
    double eta = config.eta_initial;
    bool converged = false;

    auto finish_post_stats = [&](double final_phi) {
        record.final_phi_c = final_phi;
        if (!converged) return;
        const std::size_t start = *record.convergence_index + 1;
        if (start < record.iterations.size()) {
            double sum_dphi = 0.0, sum_phi = 0.0;
            std::size_t count = 0;
            for (std::size_t i = start; i < record.iterations.size(); ++i) {
                sum_dphi += record.iterations[i].delta_phi;
                sum_phi += record.iterations[i].phi_c;
                ++count;
            }
            record.post_convergence_mean_dphi = sum_dphi / static_cast<double>(count);
            record.post_convergence_mean_phi_c = sum_phi / static_cast<double>(count);
        } else {
            // Converged on the final iteration; only the updated phase exists.
            record.post_convergence_mean_dphi = wrap_to_pi(final_phi - config.model.phi_0);
            record.post_convergence_mean_phi_c = final_phi;
        }
    };

    for (std::size_t i = 0; i < config.max_iterations; ++i) {
        ModelParams params = config.model;
        params.phi_c = phi;

        CostEstimate cost_est;
        GradientEstimate grad;
        try {
            cost_est = evaluator.evaluate(params, derive_seed(config.seed, i, kEvalTag));
            grad = estimate_gradient(evaluator, params, config.fd_step,
                                     derive_seed(config.seed, i, kGradTag));
        } catch (const std::exception& e) {
            record.abort_reason = e.what();
            record.failed_to_train = true;
            finish_post_stats(phi);
            return record;
        }

        record.iterations.push_back(QcaIteration{i, phi, wrap_to_pi(phi - config.model.phi_0),
                                                 cost_est.cost, cost_est.std_error, grad.value,
                                                 eta});

        const bool crossed_now = !converged && cost_est.cost <= threshold;
        if (crossed_now) {
            converged = true;
            record.convergence_index = i;
            record.t_opt = i;
        }

        phi -= eta * grad.value;
        // The reduced rate takes effect at the iteration after convergence.
        if (crossed_now) eta = config.eta_initial / config.eta_post_factor;
    }
    record.failed_to_train = !converged;
    finish_post_stats(phi);
    return record;
}

QcaRunRecord qca_run(const QcaConfig& config) {
    MeasuredCostEvaluator evaluator(config.samples_per_iteration, config.noise);
    return qca_run(config, evaluator);
}

std::optional<std::size_t> detect_convergence(std::span<const double> cost_history,
                                              double theoretical_min, double sigma,
                                              double multiple) {
    if (!(sigma > 0.0)) throw std::invalid_argument("detect_convergence: sigma must be > 0");
    const double threshold = theoretical_min + multiple * sigma;
    for (std::size_t i = 0; i < cost_history.size(); ++i)
        if (cost_history[i] <= threshold) return i;
    return std::nullopt;
}

PrecisionStats aggregate_precision(std::span<const double> per_run_means,
                                   std::size_t n_excluded) {
    PrecisionStats stats;
    stats.per_run_means.assign(per_run_means.begin(), per_run_means.end());
    stats.n_runs = stats.per_run_means.size();
    stats.n_excluded = n_excluded;
    if (stats.n_runs == 0) return stats;
    double sum = 0.0, sum_sq = 0.0;
    for (double m : stats.per_run_means) {
        sum += m;
        sum_sq += m * m;
    }
    stats.mean_of_means = sum / static_cast<double>(stats.n_runs);
    stats.std_of_means = std::sqrt(sum_sq / static_cast<double>(stats.n_runs));
    return stats;
}

PrecisionStats precision_study(const QcaConfig& config, std::size_t n_runs,
                               std::uint64_t seed_base, unsigned workers) {
    if (n_runs < 2) throw std::invalid_argument("precision_study: need at least 2 runs");

    std::vector<std::optional<double>> means(n_runs);
    parallel_for(n_runs, workers, [&](std::size_t run) {
        QcaConfig cfg = config;
        cfg.seed = derive_seed(seed_base, run, 0x50);
        const QcaRunRecord record = qca_run(cfg);
        if (record.converged()) means[run] = record.post_convergence_mean_dphi;
    });

    std::vector<double> kept;
    std::size_t excluded = 0;
    for (const auto& m : means) {
        if (m)
            kept.push_back(*m);
        else
            ++excluded;
    }
    if (kept.empty()) throw std::runtime_error("precision_study: all runs failed to train");
    return aggregate_precision(kept, excluded);
}

namespace {

double median_t_opt(const QcaConfig& config, std::size_t runs, std::uint64_t seed_base,
                    unsigned workers) {
    std::vector<std::optional<std::size_t>> t_opts(runs);
    parallel_for(runs, workers, [&](std::size_t run) {
        QcaConfig cfg = config;
        cfg.seed = derive_seed(seed_base, run, 0x50);
        const QcaRunRecord record = qca_run(cfg);
        if (record.converged()) t_opts[run] = *record.t_opt;
    });
    std::vector<double> values;
    for (const auto& t : t_opts)
        if (t) values.push_back(static_cast<double>(*t));
    if (values.empty()) throw std::runtime_error("time-to-solution: no run converged");
    return median(std::move(values));
}

}  // namespace

std::vector<SqueezingStudyRow> squeezing_study(const QcaConfig& base,
                                               std::span<const double> r_values,
                                               std::size_t runs_per_r, unsigned workers,
                                               bool randomize_init_sign) {
    if (r_values.empty()) throw std::invalid_argument("squeezing_study: empty r list");

    std::vector<SqueezingStudyRow> rows;
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
        QcaConfig cfg = base;
        cfg.model.r = r_values[ri];

        std::vector<std::optional<double>> means(runs_per_r);
        std::vector<std::optional<std::size_t>> t_opts(runs_per_r);
        parallel_for(runs_per_r, workers, [&](std::size_t run) {
            QcaConfig run_cfg = cfg;
            run_cfg.seed = derive_seed(base.seed, ri * 10007 + run, 0x53);
            if (randomize_init_sign) {
                const double offset = base.model.phi_c - base.model.phi_0;
                const double sign = derive_seed(run_cfg.seed, 0x5f) & 1 ? 1.0 : -1.0;
                run_cfg.model.phi_c = base.model.phi_0 + sign * std::abs(offset);
            }
            const QcaRunRecord record = qca_run(run_cfg);
            if (record.converged()) {
                means[run] = record.post_convergence_mean_dphi;
                t_opts[run] = *record.t_opt;
            }
        });

        SqueezingStudyRow row;
        row.r = r_values[ri];
        std::vector<double> kept, ts;
        std::size_t excluded = 0;
        for (std::size_t run = 0; run < runs_per_r; ++run) {
            if (means[run]) {
                kept.push_back(*means[run]);
                ts.push_back(static_cast<double>(*t_opts[run]));
            } else {
                ++excluded;
            }
        }
        if (kept.empty())
            throw std::runtime_error("squeezing_study: all runs failed at r = " +
                                     format_double(row.r));
        row.precision = aggregate_precision(kept, excluded);
        row.t_opt_median = median(std::move(ts));
        rows.push_back(std::move(row));
    }
    return rows;
}

TimeToSolutionStudy time_to_solution_study(const QcaConfig& base,
                                           std::span<const double> r_values,
                                           std::size_t runs_per_r, unsigned workers) {
    if (r_values.size() < 2)
        throw std::invalid_argument("time_to_solution_study: need >= 2 squeezing values");
    for (std::size_t i = 1; i < r_values.size(); ++i)
        if (!(r_values[i] > r_values[i - 1]))
            throw std::invalid_argument("time_to_solution_study: r values must increase");

    TimeToSolutionStudy study;
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
        QcaConfig cfg = base;
        cfg.model.r = r_values[ri];
        study.median_t_opt.emplace_back(
            r_values[ri], median_t_opt(cfg, runs_per_r, derive_seed(base.seed, ri, 0x54), workers));
    }
    study.speedup_ratio = study.median_t_opt.front().second / study.median_t_opt.back().second;
    return study;
}

PlateauProbeResult barren_plateau_probe(const QcaConfig& config, std::size_t n_trials,
                                        InitPolicy policy, double fixed_delta_phi,
                                        unsigned workers, const CostEvaluator* evaluator) {
    if (n_trials < 10) throw std::invalid_argument("barren_plateau_probe: need >= 10 trials");

    struct Trial {
        bool converged = false;
        double mean_dphi = 0.0;
        double final_dphi = 0.0;
    };
    std::vector<Trial> trials(n_trials);

    parallel_for(n_trials, workers, [&](std::size_t t) {
        QcaConfig cfg = config;
        cfg.seed = derive_seed(config.seed, t, 0x42);
        double dphi0 = fixed_delta_phi;
        if (policy == InitPolicy::uniform_random) {
            Rng rng(derive_seed(config.seed, t, kInitTag));
            dphi0 = rng.uniform(-pi, pi);
        }
        cfg.model.phi_c = cfg.model.phi_0 + dphi0;
        const QcaRunRecord record = evaluator ? qca_run(cfg, *evaluator) : qca_run(cfg);
        trials[t].converged = record.converged();
        trials[t].mean_dphi = record.post_convergence_mean_dphi;
        trials[t].final_dphi = wrap_to_pi(record.final_phi_c - cfg.model.phi_0);
    });

    // Failure needs both no convergence and a final phase far outside the
    // converged population's scatter.
    double pop_sq = 0.0;
    std::size_t pop_n = 0;
    for (const Trial& t : trials)
        if (t.converged) {
            pop_sq += t.mean_dphi * t.mean_dphi;
            ++pop_n;
        }
    const double pop_sd = pop_n > 0 ? std::sqrt(pop_sq / static_cast<double>(pop_n)) : 0.0;

    PlateauProbeResult result;
    result.n_trials = n_trials;
    for (const Trial& t : trials) {
        if (t.converged) {
            ++result.n_converged;
        } else if (pop_n == 0 || std::abs(t.final_dphi) > 10.0 * pop_sd) {
            ++result.n_failed;
        }
    }
    result.failure_fraction =
        static_cast<double>(result.n_failed) / static_cast<double>(n_trials);
    return result;
}

QcaRunRecord adaptive_run(const QcaConfig& base, std::span<const AdaptiveStage> schedule) {
    if (schedule.empty()) throw std::invalid_argument("adaptive_run: empty schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i].r > schedule[i - 1].r))
            throw std::invalid_argument("adaptive_run: schedule must strictly increase in r");

    QcaRunRecord combined;
    double phi_start = base.model.phi_c;
    std::size_t offset = 0;

    for (std::size_t s = 0; s < schedule.size(); ++s) {
        QcaConfig cfg = base;
        cfg.model.r = schedule[s].r;
        cfg.model.phi_c = phi_start;
        if (schedule[s].eta_initial) cfg.eta_initial = *schedule[s].eta_initial;
        if (schedule[s].max_iterations) cfg.max_iterations = *schedule[s].max_iterations;
        if (schedule[s].samples_per_iteration)
            cfg.samples_per_iteration = *schedule[s].samples_per_iteration;
        // A one-stage schedule is exactly qca_run, seed included.
        cfg.seed = s == 0 ? base.seed : derive_seed(base.seed, s, 0xA0);

        QcaRunRecord stage = qca_run(cfg);
        for (QcaIteration it : stage.iterations) {
            it.index += offset;
            combined.iterations.push_back(it);
        }

        if (!stage.converged()) {
            combined.failed_to_train = true;
            combined.final_phi_c = stage.final_phi_c;
            combined.abort_reason = "stage " + std::to_string(s) + " failed to train";
            return combined;
        }

        combined.convergence_index = offset + *stage.convergence_index;
        combined.t_opt = combined.convergence_index;
        combined.post_convergence_mean_dphi = stage.post_convergence_mean_dphi;
        combined.post_convergence_mean_phi_c = stage.post_convergence_mean_phi_c;
        combined.final_phi_c = stage.final_phi_c;
        offset += stage.iterations.size();
        phi_start = stage.post_convergence_mean_phi_c;
    }
    combined.failed_to_train = false;
    return combined;
}

}  // namespace cvqc
