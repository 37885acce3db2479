#include "cvqc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvqc/levmar.hpp"

namespace cvqc {

double compensated_sum(std::span<const double> values) {
    double sum = 0.0, carry = 0.0;
    for (double v : values) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("stats: mean of empty range");
    return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("stats: variance needs >= 2 samples");
    const double mu = mean(values);
    double sum = 0.0, carry = 0.0;
    for (double v : values) {
        const double d = v - mu;
        const double y = d * d - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(values.size() - 1);
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("stats: median of empty range");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, int bins) {
    if (bins < 1) throw std::invalid_argument("stats: need at least one bin");
    if (!(hi > lo)) throw std::invalid_argument("stats: empty histogram range");
    Histogram h;
    h.bin_width = (hi - lo) / bins;
    h.centers.resize(static_cast<std::size_t>(bins));
    h.counts.assign(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b)
        h.centers[static_cast<std::size_t>(b)] = lo + (b + 0.5) * h.bin_width;
    for (double v : values) {
        if (v < lo || v >= hi) continue;
        auto b = static_cast<std::size_t>((v - lo) / h.bin_width);
        if (b >= h.counts.size()) b = h.counts.size() - 1;
        h.counts[b] += 1.0;
    }
    return h;
}

GaussianFit fit_gaussian_histogram(const Histogram& hist) {
    std::vector<double> xs, cs;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        if (hist.counts[i] > 0.0) {
            xs.push_back(hist.centers[i]);
            cs.push_back(hist.counts[i]);
        }
    }
    if (xs.size() < 4) throw std::runtime_error("stats: too few occupied bins for a Gaussian fit");

    // Moment-based initialization from the binned data.
    double total = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        total += cs[i];
        m1 += cs[i] * xs[i];
    }
    m1 /= total;
    double m2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) m2 += cs[i] * (xs[i] - m1) * (xs[i] - m1);
    m2 /= total;
    if (!(m2 > 0.0)) throw std::runtime_error("stats: degenerate histogram (zero spread)");

    const double amp0 = *std::max_element(cs.begin(), cs.end());

    auto residuals = [&](std::span<const double> theta, std::span<double> out) {
        const double amp = theta[0], mu = theta[1], var = theta[2];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d = xs[i] - mu;
            const double model = amp * std::exp(-0.5 * d * d / var);
            out[i] = (cs[i] - model) / std::sqrt(cs[i]);
        }
    };

    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> lower{1e-12, -inf, 1e-300};
    const std::vector<double> upper{inf, inf, inf};
    LevMarResult fit =
        levmar_fit(residuals, xs.size(), {amp0, m1, m2}, lower, upper, LevMarOptions{});

    GaussianFit out;
    out.amplitude = fit.params[0];
    out.mean = fit.params[1];
    out.variance = fit.params[2];
    out.rss = fit.rss;
    out.converged = fit.converged;
    if (!std::isfinite(out.variance) || out.variance <= 0.0)
        throw std::runtime_error("stats: Gaussian histogram fit failed");
    return out;
}

}  // namespace cvqc
