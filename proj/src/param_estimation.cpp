#include "cvqc/param_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "cvqc/gaussian_model.hpp"
#include "cvqc/levmar.hpp"
#include "cvqc/util.hpp"

namespace cvqc {

namespace {

void check_quadratic_inputs(double epsilon, double epsilon_prime, double n_in,
                            double measured_variance) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("solve_r: epsilon must lie in (0, 1]");
    if (!(epsilon_prime > 0.0 && epsilon_prime <= 1.0))
        throw std::invalid_argument("solve_r: epsilon_prime must lie in (0, 1]");
    if (!(n_in >= 0.5)) throw std::invalid_argument("solve_r: n_in must be >= 1/2");
    if (!(measured_variance > 0.0))
        throw std::invalid_argument("solve_r: measured variance must be positive");
}

}  // namespace

QuadraticCoeffs quadratic_coeffs(double epsilon, double epsilon_prime, double n_in,
                                 double measured_variance) {
    check_quadratic_inputs(epsilon, epsilon_prime, n_in, measured_variance);
    const double sum = epsilon_prime + epsilon;
    const double diff = epsilon_prime - epsilon;
    const double cross = std::sqrt(epsilon * epsilon_prime) * (2.0 * n_in + 1.0);

    QuadraticCoeffs q;
    q.a = 0.5 * sum * n_in + 0.25 * sum + 0.5 * cross;
    q.b = 0.5 * diff * n_in - 0.25 * diff + 0.5 * (2.0 - sum) - 2.0 * measured_variance;
    q.c = 0.125 * sum * n_in + 0.0625 * sum - 0.125 * cross;
    return q;
}

RootSelection solve_r_detailed(double epsilon, double epsilon_prime, double n_in,
                               double measured_variance) {
    const QuadraticCoeffs q = quadratic_coeffs(epsilon, epsilon_prime, n_in, measured_variance);

    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    if (disc < 0.0)
        throw std::runtime_error("solve_r: no real root for the given variance");
    const double sq = std::sqrt(disc);

    double r1, r2;
    if (q.b >= 0.0) {
        const double big = -(q.b + sq) / 2.0;
        r1 = big / q.a;
        r2 = big != 0.0 ? q.c / big : 0.0;
    } else {
        const double big = -(q.b - sq) / 2.0;
        r1 = big / q.a;
        r2 = big != 0.0 ? q.c / big : 0.0;
    }

    constexpr double upper_slack = 0.5 + 1e-12;
    auto physical = [&](double root) { return root > 0.0 && root <= upper_slack; };

    std::vector<double> in_range;
    if (physical(r1)) in_range.push_back(std::min(r1, 0.5));
    if (physical(r2) && r2 != r1) in_range.push_back(std::min(r2, 0.5));
    if (in_range.empty())
        throw std::runtime_error("solve_r: no physical root in (0, 1/2]");

    RootSelection sel;
    if (in_range.size() == 1) {
        sel.selected_root = in_range[0];
    } else {
        sel.selected_root = std::max(in_range[0], in_range[1]);
        sel.discarded_root = std::min(in_range[0], in_range[1]);
    }
    sel.r = std::max(0.0, -0.5 * std::log(2.0 * sel.selected_root));
    return sel;
}

double solve_r(double epsilon, double epsilon_prime, double n_in, double measured_variance) {
    return solve_r_detailed(epsilon, epsilon_prime, n_in, measured_variance).r;
}

bool r_identifiable(double epsilon, double epsilon_prime, double n_in, double r) {
    // A and C do not depend on the measured variance; pass a placeholder.
    const QuadraticCoeffs q = quadratic_coeffs(epsilon, epsilon_prime, n_in, 1.0);
    const double root = 0.5 * std::exp(-2.0 * r);
    return root * root >= q.c / q.a - 1e-15;
}

double estimate_min_variance(const LandscapeTable& landscape, double fwhm_fraction) {
    if (!(fwhm_fraction > 0.0 && fwhm_fraction < 1.0))
        throw std::invalid_argument("estimate_min_variance: fwhm_fraction must lie in (0, 1)");
    const std::size_t n = landscape.rows.size();
    if (n < 3) throw std::invalid_argument("estimate_min_variance: need at least 3 rows");

    std::vector<double> dphi(n), cost_col(n);
    for (std::size_t i = 0; i < n; ++i) {
        dphi[i] = landscape.rows[i].delta_phi;
        cost_col[i] = landscape.rows[i].cost;
    }
    const double width = dip_fwhm(dphi, cost_col);

    const std::size_t k = static_cast<std::size_t>(
        std::min_element(cost_col.begin(), cost_col.end()) - cost_col.begin());
    const double center = dphi[k];
    const double half_window = 0.5 * fwhm_fraction * width;

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(dphi[i] - center) <= half_window) {
            sum += landscape.rows[i].variance;
            ++count;
        }
    }
    if (count == 0) {  // window narrower than the grid; the minimum row stands in
        sum = landscape.rows[k].variance;
        count = 1;
    }
    return sum / static_cast<double>(count);
}

void ParametricCostModel::annotate(std::span<const double>, FitResult&) const {}

SeedNoiseCostModel::SeedNoiseCostModel(double epsilon, double min_variance, FitBounds bounds)
    : epsilon_(epsilon), min_variance_(min_variance), bounds_(bounds) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("SeedNoiseCostModel: epsilon must lie in (0, 1]");
    if (!(min_variance > 0.0))
        throw std::invalid_argument("SeedNoiseCostModel: min variance must be positive");
}

std::vector<double> SeedNoiseCostModel::lower_bounds() const {
    return {bounds_.epsilon_prime_lo, bounds_.n_in_lo};
}

std::vector<double> SeedNoiseCostModel::upper_bounds() const {
    return {bounds_.epsilon_prime_hi, bounds_.n_in_hi};
}

double SeedNoiseCostModel::eval(double delta_phi, std::span<const double> theta) const {
    const double eps_p = theta[0];
    const double n_in = theta[1];
    const double r = solve_r(epsilon_, eps_p, n_in, min_variance_);
    ModelParams p;
    p.r = r;
    p.epsilon = epsilon_;
    p.epsilon_prime = eps_p;
    p.n_b_prime = n_in - 0.5;
    p.phi_c = delta_phi;
    return cost(p);
}

void SeedNoiseCostModel::annotate(std::span<const double> theta, FitResult& out) const {
    out.epsilon_prime = theta[0];
    out.n_in = theta[1];
    out.n_b_prime = theta[1] - 0.5;
    out.r = solve_r(epsilon_, theta[0], theta[1], min_variance_);
}

NoisyReadoutCostModel::NoisyReadoutCostModel(double epsilon, double min_variance,
                                             FitBounds bounds, double readout_hi)
    : epsilon_(epsilon), min_variance_(min_variance), bounds_(bounds), readout_hi_(readout_hi) {}

std::vector<double> NoisyReadoutCostModel::lower_bounds() const {
    return {bounds_.epsilon_prime_lo, bounds_.n_in_lo, 0.0};
}

std::vector<double> NoisyReadoutCostModel::upper_bounds() const {
    return {bounds_.epsilon_prime_hi, bounds_.n_in_hi, readout_hi_};
}

double NoisyReadoutCostModel::eval(double delta_phi, std::span<const double> theta) const {
    const double readout = theta[2];
    const double optics_min = min_variance_ - readout;
    if (!(optics_min > 0.0))
        throw std::runtime_error("noisy-readout model: readout variance exceeds the measured minimum");
    const double r = solve_r(epsilon_, theta[0], theta[1], optics_min);
    ModelParams p;
    p.r = r;
    p.epsilon = epsilon_;
    p.epsilon_prime = theta[0];
    p.n_b_prime = theta[1] - 0.5;
    p.phi_c = delta_phi;
    const double variance = diff_quadrature_variance(p) + readout;
    return -1.0 / std::sqrt(2.0 * pi * variance);
}

void NoisyReadoutCostModel::annotate(std::span<const double> theta, FitResult& out) const {
    out.epsilon_prime = theta[0];
    out.n_in = theta[1];
    out.n_b_prime = theta[1] - 0.5;
    const double optics_min = min_variance_ - theta[2];
    if (optics_min > 0.0) out.r = solve_r(epsilon_, theta[0], theta[1], optics_min);
}

namespace {

double halton(std::size_t index, std::size_t base) {
    double f = 1.0, value = 0.0;
    std::size_t i = index;
    while (i > 0) {
        f /= static_cast<double>(base);
        value += f * static_cast<double>(i % base);
        i /= base;
    }
    return value;
}

constexpr std::size_t kHaltonBases[4] = {2, 3, 5, 7};

}  // namespace

FitResult fit_parametric(const ParametricCostModel& model, const LandscapeTable& data,
                         int multi_starts, bool weighted) {
    const std::size_t n = data.rows.size();
    if (n < model.param_count() + 1)
        throw std::invalid_argument("fit_parametric: more parameters than data points");
    if (multi_starts < 1) throw std::invalid_argument("fit_parametric: need >= 1 start");

    const std::vector<double> lo = model.lower_bounds();
    const std::vector<double> hi = model.upper_bounds();
    const std::size_t p = model.param_count();

    std::vector<double> weights(n, 1.0);
    if (weighted) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& e = data.rows[i].cost_stderr;
            if (e && *e > 0.0) weights[i] = 1.0 / *e;
        }
    }

    auto residuals = [&](std::span<const double> theta, std::span<double> out) {
        for (std::size_t i = 0; i < n; ++i) {
            double model_cost;
            try {
                model_cost = model.eval(data.rows[i].delta_phi, theta);
            } catch (const std::exception&) {
                model_cost = 1e6;  // infeasible point; repel the optimizer
            }
            out[i] = (model_cost - data.rows[i].cost) * weights[i];
        }
    };

    // Starts: box center, box corners, then low-discrepancy fill.
    std::vector<std::vector<double>> starts;
    starts.emplace_back(p, 0.5);
    const std::size_t corner_count = std::size_t{1} << std::min<std::size_t>(p, 4);
    for (std::size_t c = 0; c < corner_count && starts.size() < static_cast<std::size_t>(multi_starts); ++c) {
        std::vector<double> corner(p);
        for (std::size_t j = 0; j < p; ++j) corner[j] = (c >> j) & 1 ? 0.999 : 0.001;
        starts.push_back(std::move(corner));
    }
    for (std::size_t s = 1; starts.size() < static_cast<std::size_t>(multi_starts); ++s) {
        std::vector<double> point(p);
        for (std::size_t j = 0; j < p; ++j) point[j] = halton(s, kHaltonBases[j % 4]);
        starts.push_back(std::move(point));
    }

    std::vector<LevMarResult> stops;
    for (const auto& unit : starts) {
        std::vector<double> start(p);
        for (std::size_t j = 0; j < p; ++j) start[j] = lo[j] + (hi[j] - lo[j]) * unit[j];
        stops.push_back(levmar_fit(residuals, n, std::move(start), lo, hi, LevMarOptions{}));
    }

    std::size_t best = 0;
    for (std::size_t s = 1; s < stops.size(); ++s)
        if (stops[s].rss < stops[best].rss) best = s;
    if (!std::isfinite(stops[best].rss))
        throw std::runtime_error("fit_parametric: optimization failed to converge");
    LevMarResult chosen = stops[best];

    // The constrained family is flat along one parameter combination: the
    // fitted curve depends on the parameters only through the coupling
    // strength, so the least-squares minimum is a ridge, not a point. The
    // unidentified direction is anchored at the transmissivity ceiling
    // (that bound is itself a measurement): pin the leading parameter at its
    // upper bound, refit the rest, and adopt the pinned solution whenever
    // its rss is statistically indistinguishable from the free optimum.
    if (p >= 2) {
        std::vector<double> pinned_lo(lo.begin(), lo.end());
        pinned_lo[0] = hi[0];
        std::optional<LevMarResult> edge;
        std::vector<std::vector<double>> edge_starts{chosen.params};
        for (double u : {0.5, 0.15, 0.85}) {
            std::vector<double> start(p);
            start[0] = hi[0];
            for (std::size_t j = 1; j < p; ++j) start[j] = lo[j] + (hi[j] - lo[j]) * u;
            edge_starts.push_back(std::move(start));
        }
        for (auto start : edge_starts) {
            start[0] = hi[0];
            LevMarResult fit = levmar_fit(residuals, n, std::move(start), pinned_lo, hi,
                                          LevMarOptions{});
            if (!edge || fit.rss < edge->rss) edge = std::move(fit);
        }
        if (edge && edge->rss <= chosen.rss + 1e-9 * (1.0 + chosen.rss)) chosen = *edge;
    }

    FitResult result;
    result.model_name = model.name();
    result.k = p;
    result.params = chosen.params;
    result.rss = chosen.rss;
    result.n_points = n;
    result.aic = aic(p, n, std::max(chosen.rss, 1e-300));
    try {
        model.annotate(chosen.params, result);
    } catch (const std::exception& e) {
        result.warnings.push_back(std::string("annotation failed: ") + e.what());
    }

    const double eps_range = hi[0] - lo[0];
    const auto& theta = chosen.params;
    result.bound_active_epsilon_prime = std::abs(theta[0] - lo[0]) < 1e-6 * eps_range ||
                                        std::abs(theta[0] - hi[0]) < 1e-6 * eps_range;
    if (p > 1) {
        const double nin_range = hi[1] - lo[1];
        result.bound_active_n_in = std::abs(theta[1] - lo[1]) < 1e-6 * nin_range ||
                                   std::abs(theta[1] - hi[1]) < 1e-6 * nin_range;
    }
    if (result.bound_active_epsilon_prime) result.warnings.push_back("epsilon_prime at bound");
    if (result.bound_active_n_in) result.warnings.push_back("n_in at bound");
    return result;
}

FitResult fit_cost_model(const LandscapeTable& data, const FitOptions& options) {
    const std::size_t n = data.rows.size();
    if (n < 10) throw std::invalid_argument("fit_cost_model: need >= 10 data points");
    const double span_phi = data.rows.back().delta_phi - data.rows.front().delta_phi;
    if (!(span_phi >= pi))
        throw std::invalid_argument("fit_cost_model: data must span >= pi of delta_phi");
    if (!(options.bounds.epsilon_prime_hi > options.bounds.epsilon_prime_lo) ||
        !(options.bounds.n_in_hi > options.bounds.n_in_lo))
        throw std::invalid_argument("fit_cost_model: invalid bounds");

    const double min_var = options.min_variance
                               ? *options.min_variance
                               : estimate_min_variance(data, options.fwhm_fraction);

    SeedNoiseCostModel model(options.epsilon, min_var, options.bounds);
    FitResult result = fit_parametric(model, data, options.multi_starts, options.weighted);

    // The model's minimum sits at delta_phi = 0; if the measured minimum sits
    // further than one grid step away, flag it (the fit stays authoritative).
    std::size_t k_min = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (data.rows[i].cost < data.rows[k_min].cost) k_min = i;
    std::vector<double> spacings;
    for (std::size_t i = 1; i < n; ++i)
        spacings.push_back(data.rows[i].delta_phi - data.rows[i - 1].delta_phi);
    std::nth_element(spacings.begin(), spacings.begin() + static_cast<std::ptrdiff_t>(spacings.size() / 2),
                     spacings.end());
    const double grid_step = spacings[spacings.size() / 2];
    if (std::abs(data.rows[k_min].delta_phi) > grid_step)
        result.warnings.push_back("empirical minimum location differs from the fit by more than the grid spacing");
    return result;
}

double aic(std::size_t k, std::size_t n, double rss) {
    if (n < 1) throw std::invalid_argument("aic: need n >= 1");
    if (!(rss > 0.0)) throw std::invalid_argument("aic: rss must be positive");
    const double nn = static_cast<double>(n);
    return 2.0 * static_cast<double>(k) + nn * (1.0 + std::log(2.0 * pi) + std::log(rss / nn));
}

ModelComparison compare_models(std::span<const FitResult> fits) {
    if (fits.size() < 2) throw std::invalid_argument("compare_models: need >= 2 fits");
    for (std::size_t i = 1; i < fits.size(); ++i)
        if (fits[i].n_points != fits[0].n_points)
            throw std::invalid_argument("compare_models: fits were made on different data");

    ModelComparison cmp;
    cmp.ranking.resize(fits.size());
    std::iota(cmp.ranking.begin(), cmp.ranking.end(), std::size_t{0});
    std::sort(cmp.ranking.begin(), cmp.ranking.end(),
              [&](std::size_t a, std::size_t b) { return fits[a].aic < fits[b].aic; });
    cmp.best = cmp.ranking.front();

    const double best_aic = fits[cmp.best].aic;
    cmp.delta_aic.resize(fits.size());
    cmp.significantly_less_supported.resize(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
        cmp.delta_aic[i] = fits[i].aic - best_aic;
        cmp.significantly_less_supported[i] = cmp.delta_aic[i] >= 10.0;
    }
    return cmp;
}

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["model"] = model_name;
    j["k"] = k;
    j["epsilon_prime"] = epsilon_prime;
    j["n_in"] = n_in;
    j["n_b_prime"] = n_b_prime;
    j["r"] = r;
    j["rss"] = rss;
    j["n_points"] = n_points;
    j["aic"] = aic;
    j["params"] = params;
    j["bounds_active"] = {{"epsilon_prime", bound_active_epsilon_prime},
                          {"n_in", bound_active_n_in}};
    j["warnings"] = warnings;
    return j.dump(2);
}

}  // namespace cvqc
