#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvqc/cost_landscape.hpp"

namespace cvqc {

/// Coefficients of A R^2 + B R + C = 0 in R = exp(-2r)/2, obtained by
/// equating the closed-form minimum variance (delta_phi = 0) to a measured
/// value. A > 0 for physical inputs; C does not depend on the measurement.
struct QuadraticCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

QuadraticCoeffs quadratic_coeffs(double epsilon, double epsilon_prime, double n_in,
                                 double measured_variance);

struct RootSelection {
    double r = 0.0;
    double selected_root = 0.0;  ///< R in (0, 1/2]
    std::optional<double> discarded_root;
};

/// Squeezing parameter consistent with a measured minimum variance.
/// When both quadratic roots are physical, the larger R (smaller r) is
/// selected: it is the branch continuous with the symmetric-loss limit,
/// and the only branch on which variance determines r uniquely.
/// Throws when no root lies in (0, 1/2].
RootSelection solve_r_detailed(double epsilon, double epsilon_prime, double n_in,
                               double measured_variance);
double solve_r(double epsilon, double epsilon_prime, double n_in, double measured_variance);

/// True when (epsilon, epsilon_prime, n_in, r) lies on the invertible
/// branch, i.e. exp(-2r)/2 >= sqrt(C/A).
bool r_identifiable(double epsilon, double epsilon_prime, double n_in, double r);

/// Averages the measured variance over the window |dphi - dphi_min| <=
/// (fwhm_fraction / 2) * FWHM around the empirical cost minimum.
/// Throws when the table does not bracket a minimum.
double estimate_min_variance(const LandscapeTable& landscape, double fwhm_fraction = 0.12);

struct FitBounds {
    double epsilon_prime_lo = 0.0;
    double epsilon_prime_hi = 0.6;
    double n_in_lo = 0.71;
    double n_in_hi = 10.0;
};

struct FitResult {
    std::string model_name = "seed-noise";
    std::size_t k = 2;  ///< fitted parameter count
    double epsilon_prime = 0.0;
    double n_in = 0.0;
    double n_b_prime = 0.0;
    double r = 0.0;
    double rss = 0.0;
    std::size_t n_points = 0;
    double aic = 0.0;
    std::vector<double> params;
    bool bound_active_epsilon_prime = false;
    bool bound_active_n_in = false;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

/// Any parametric cost curve C(delta_phi; theta) with box bounds. Lets the
/// comparison machinery host alternative noise models.
class ParametricCostModel {
public:
    virtual ~ParametricCostModel() = default;
    virtual std::string name() const = 0;
    virtual std::size_t param_count() const = 0;
    virtual std::vector<double> lower_bounds() const = 0;
    virtual std::vector<double> upper_bounds() const = 0;
    /// May throw to mark an infeasible parameter point.
    virtual double eval(double delta_phi, std::span<const double> theta) const = 0;
    /// Fill the physically named FitResult fields from a parameter vector.
    virtual void annotate(std::span<const double> theta, FitResult& out) const;
};

/// Two-parameter model (epsilon_prime, N_in), with r eliminated through the
/// measured minimum variance. epsilon is fixed, never fitted.
class SeedNoiseCostModel final : public ParametricCostModel {
public:
    SeedNoiseCostModel(double epsilon, double min_variance, FitBounds bounds = {});
    std::string name() const override { return "seed-noise"; }
    std::size_t param_count() const override { return 2; }
    std::vector<double> lower_bounds() const override;
    std::vector<double> upper_bounds() const override;
    double eval(double delta_phi, std::span<const double> theta) const override;
    void annotate(std::span<const double> theta, FitResult& out) const override;

    double epsilon() const { return epsilon_; }
    double min_variance() const { return min_variance_; }

private:
    double epsilon_;
    double min_variance_;
    FitBounds bounds_;
};

/// Illustrative three-parameter variant: an additional variance floor on
/// the readout, theta = (epsilon_prime, N_in, readout_variance). Nests the
/// seed-noise model at readout_variance = 0.
class NoisyReadoutCostModel final : public ParametricCostModel {
public:
    NoisyReadoutCostModel(double epsilon, double min_variance, FitBounds bounds = {},
                          double readout_hi = 0.2);
    std::string name() const override { return "noisy-readout"; }
    std::size_t param_count() const override { return 3; }
    std::vector<double> lower_bounds() const override;
    std::vector<double> upper_bounds() const override;
    double eval(double delta_phi, std::span<const double> theta) const override;
    void annotate(std::span<const double> theta, FitResult& out) const override;

private:
    double epsilon_;
    double min_variance_;
    FitBounds bounds_;
    double readout_hi_;
};

struct FitOptions {
    FitBounds bounds;
    double epsilon = 0.77;  ///< measured conjugate transmissivity, fixed
    int multi_starts = 16;
    bool weighted = false;  ///< weight residuals by 1/cost_stderr when present
    std::optional<double> min_variance;
    double fwhm_fraction = 0.12;
};

/// Bounded nonlinear least squares of any parametric model against a
/// landscape, multi-start over the bound box (low-discrepancy starts).
FitResult fit_parametric(const ParametricCostModel& model, const LandscapeTable& data,
                         int multi_starts = 16, bool weighted = false);

/// The constrained two-parameter fit: requires >= 10 points spanning >= pi.
FitResult fit_cost_model(const LandscapeTable& data, const FitOptions& options = {});

/// 2k + n (1 + ln 2pi + ln(rss / n)).
double aic(std::size_t k, std::size_t n, double rss);

struct ModelComparison {
    std::vector<std::size_t> ranking;  ///< indices into `fits`, ascending AIC
    std::vector<double> delta_aic;     ///< per fit, relative to the best
    std::vector<bool> significantly_less_supported;  ///< delta AIC >= 10
    std::size_t best = 0;
};

/// Ranks >= 2 fits made on identical data (same n_points).
ModelComparison compare_models(std::span<const FitResult> fits);

}  // namespace cvqc
