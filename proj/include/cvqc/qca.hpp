#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvqc/homodyne.hpp"
#include "cvqc/model_params.hpp"

namespace cvqc {

/// One cost evaluation as the learning loop sees it. Implementations must be
/// pure given (params, eval_seed) so runs are reproducible and parallelizable.
class CostEvaluator {
public:
    virtual ~CostEvaluator() = default;
    virtual CostEstimate evaluate(const ModelParams& params, std::uint64_t eval_seed) const = 0;
};

/// Measurement-backed evaluator: sampling, voltage synthesis, processing.
class MeasuredCostEvaluator final : public CostEvaluator {
public:
    MeasuredCostEvaluator(std::size_t n_samples, NoiseConfig noise)
        : n_samples_(n_samples), noise_(noise) {}
    CostEstimate evaluate(const ModelParams& params, std::uint64_t eval_seed) const override;

private:
    std::size_t n_samples_;
    NoiseConfig noise_;
};

/// Exact closed-form evaluator with zero statistical error; the noiseless
/// reference for descent diagnostics.
class AnalyticCostEvaluator final : public CostEvaluator {
public:
    CostEstimate evaluate(const ModelParams& params, std::uint64_t eval_seed) const override;
};

struct GradientEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Central finite difference from two fresh evaluations at phi_c +- fd_step.
GradientEstimate estimate_gradient(const CostEvaluator& evaluator, const ModelParams& at,
                                   double fd_step, std::uint64_t seed);

struct QcaConfig {
    /// Parameter template. phi_0 is the hidden target; phi_c the initial
    /// control phase the loop starts from.
    ModelParams model;
    double eta_initial = 0.35;
    double eta_post_factor = 10.0;  ///< learning-rate divisor applied after convergence
    std::size_t max_iterations = 550;
    double fd_step = 0.05;  ///< finite-difference phase step (rad)
    std::size_t samples_per_iteration = 100000;
    double convergence_sigma_multiple = 1.0;
    /// When unset the convergence band width is the empirical standard error
    /// of one evaluator call at the analytic minimum.
    std::optional<double> convergence_sigma_override;
    NoiseConfig noise;
    std::uint64_t seed = 1;

    void validate() const;
};

struct QcaIteration {
    std::size_t index = 0;
    double phi_c = 0.0;
    double delta_phi = 0.0;  ///< wrapped to (-pi, pi]
    double cost = 0.0;
    double cost_stderr = 0.0;
    double gradient = 0.0;
    double eta = 0.0;  ///< learning rate used by this iteration's update
};

struct QcaRunRecord {
    std::vector<QcaIteration> iterations;
    std::optional<std::size_t> convergence_index;
    std::optional<std::size_t> t_opt;  ///< equals convergence_index when converged
    double post_convergence_mean_dphi = 0.0;
    double post_convergence_mean_phi_c = 0.0;
    bool failed_to_train = false;
    double final_phi_c = 0.0;
    std::optional<std::string> abort_reason;

    bool converged() const { return convergence_index.has_value(); }

    /// Columns: iteration, phi_c_rad, delta_phi_rad, cost, cost_stderr, gradient, eta.
    void write_csv(std::ostream& out) const;
    /// { converged, t_opt, post_convergence_mean_dphi, failed_to_train }
    std::string summary_json() const;
};

/// Gradient descent on the control phase against the given evaluator.
/// After the measured cost first enters the convergence band around the
/// theoretical minimum, the learning rate is divided by eta_post_factor
/// (from the following iteration on) and the loop continues to
/// max_iterations to accumulate post-convergence phase statistics.
QcaRunRecord qca_run(const QcaConfig& config, const CostEvaluator& evaluator);
/// Convenience overload with the measurement-backed evaluator from config.
QcaRunRecord qca_run(const QcaConfig& config);

/// First index whose cost is within `multiple * sigma` above the minimum.
std::optional<std::size_t> detect_convergence(std::span<const double> cost_history,
                                              double theoretical_min, double sigma,
                                              double multiple);

struct PrecisionStats {
    std::size_t n_runs = 0;      ///< converged runs entering the statistics
    std::size_t n_excluded = 0;  ///< failed runs excluded (flagged)
    double mean_of_means = 0.0;  ///< average of per-run post-convergence means
    double std_of_means = 0.0;   ///< sqrt(mean of squared per-run means)
    std::vector<double> per_run_means;
};

/// Statistics over per-run post-convergence means; the spread is the root
/// mean square about zero, not about the sample mean.
PrecisionStats aggregate_precision(std::span<const double> per_run_means,
                                   std::size_t n_excluded);

/// Repeats the run n_runs times with derived seeds and aggregates the
/// per-run post-convergence mean phase differences.
PrecisionStats precision_study(const QcaConfig& config, std::size_t n_runs,
                               std::uint64_t seed_base, unsigned workers = 0);

struct SqueezingStudyRow {
    double r = 0.0;
    double t_opt_median = 0.0;
    PrecisionStats precision;
};

/// precision_study plus median time-to-solution across a squeezing ladder,
/// with matched learning rate and noise. With randomize_init_sign the
/// initial offset enters as +|dphi0| or -|dphi0| per run (seed-derived):
/// the landscape is even in delta_phi, so convergence-band entry transients
/// cancel in expectation instead of aliasing into the mean.
std::vector<SqueezingStudyRow> squeezing_study(const QcaConfig& base,
                                               std::span<const double> r_values,
                                               std::size_t runs_per_r, unsigned workers = 0,
                                               bool randomize_init_sign = false);

struct TimeToSolutionStudy {
    std::vector<std::pair<double, double>> median_t_opt;  ///< (r, median t_opt)
    double speedup_ratio = 0.0;                           ///< t_opt(r_min) / t_opt(r_max)
};

TimeToSolutionStudy time_to_solution_study(const QcaConfig& base,
                                           std::span<const double> r_values,
                                           std::size_t runs_per_r, unsigned workers = 0);

enum class InitPolicy { fixed_delta_phi, uniform_random };

struct PlateauProbeResult {
    std::size_t n_trials = 0;
    std::size_t n_converged = 0;
    std::size_t n_failed = 0;
    double failure_fraction = 0.0;
};

/// Fraction of runs that fail to train under the given initialization
/// policy. A trial counts as failed when it never converges and its final
/// |delta_phi| exceeds 10x the standard deviation of the converged
/// population (all non-converged trials fail when nothing converges).
/// Pass `evaluator` to probe against something other than the measured
/// pipeline (e.g. the analytic evaluator).
PlateauProbeResult barren_plateau_probe(const QcaConfig& config, std::size_t n_trials,
                                        InitPolicy policy, double fixed_delta_phi = 3.0,
                                        unsigned workers = 0,
                                        const CostEvaluator* evaluator = nullptr);

struct AdaptiveStage {
    double r = 0.0;
    std::optional<double> eta_initial;
    std::optional<std::size_t> max_iterations;
    std::optional<std::size_t> samples_per_iteration;
};

/// Staged run over a strictly increasing squeezing schedule. Each stage
/// starts from the previous stage's post-convergence mean control phase;
/// a stage that fails to train stops the schedule and the partial record is
/// returned with failed_to_train set.
QcaRunRecord adaptive_run(const QcaConfig& base, std::span<const AdaptiveStage> schedule);

}  // namespace cvqc
