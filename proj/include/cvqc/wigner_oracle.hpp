#pragma once

#include "cvqc/linalg.hpp"
#include "cvqc/model_params.hpp"

namespace cvqc {

/// Tensor-product Gauss-Legendre grid settings for the oracle integrals.
/// The box must cover at least 8 marginal standard deviations per axis.
struct IntegrationGrid {
    int points_per_axis = 72;
    double half_width_sigmas = 8.5;
    double tail_tolerance = 1e-8;

    void validate() const;
};

/// Zero-mean-by-default Gaussian state, quadrature order (q1, p1, q2, p2).
struct GaussianState {
    Mat4 covariance;
    Vec4 mean{};
};

/// State covariance assembled from first principles: thermal inputs, the
/// two-mode squeeze symplectic, per-mode attenuation with vacuum refill,
/// and the two phase-gate rotations. Supports n_b > 0.
/// This route is kept independent of the closed-form quadratic form so the
/// two can check each other.
GaussianState build_state(const ModelParams& params);

GaussianState displaced(GaussianState state, const Vec4& mean);

/// Wigner function value at phase-space point (x1, y1, x2, y2).
double wigner_density(const GaussianState& state, const Vec4& point);

/// Marginal density of X- = (x1 - x2)/sqrt(2) by numerically integrating
/// the Wigner function over (X+, y1, y2). Brute force on purpose.
double wigner_marginal_oracle(double x_minus, const GaussianState& state,
                              const IntegrationGrid& grid = {});
double wigner_marginal_oracle(double x_minus, const ModelParams& params,
                              const IntegrationGrid& grid = {});

struct MarginalMoments {
    double mass = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/// Zeroth/first/second moments of the oracle marginal, integrated with an
/// outer 1-D rule over the X- axis.
MarginalMoments oracle_marginal_moments(const GaussianState& state,
                                        const IntegrationGrid& grid = {});

}  // namespace cvqc
