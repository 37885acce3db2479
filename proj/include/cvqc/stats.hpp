#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvqc {

/// Compensated (Kahan) sum of a range.
double compensated_sum(std::span<const double> values);

double mean(std::span<const double> values);

/// Unbiased sample variance about the sample mean, two-pass with
/// compensated accumulation so constant offsets cancel to rounding.
double sample_variance(std::span<const double> values);

/// Median (copies and partially sorts).
double median(std::vector<double> values);

struct Histogram {
    std::vector<double> centers;
    std::vector<double> counts;
    double bin_width = 0.0;
};

/// Equal-width histogram over [lo, hi); samples outside are dropped.
Histogram make_histogram(std::span<const double> values, double lo, double hi, int bins);

struct GaussianFit {
    double amplitude = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double rss = 0.0;
    bool converged = false;
};

/// Least-squares Gaussian fit to histogram counts, residuals weighted by
/// 1/sqrt(count) (Poisson errors); empty bins are excluded.
/// Throws std::runtime_error when the data cannot support a fit.
GaussianFit fit_gaussian_histogram(const Histogram& hist);

}  // namespace cvqc
