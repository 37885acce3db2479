#include "cvqc/wigner_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqc/quadrature.hpp"
#include "cvqc/util.hpp"

namespace cvqc {

void IntegrationGrid::validate() const {
    if (points_per_axis < 16)
        throw std::invalid_argument("IntegrationGrid: need at least 16 points per axis");
    if (half_width_sigmas < 8.0)
        throw std::invalid_argument("IntegrationGrid: box must cover >= 8 standard deviations");
    if (!(tail_tolerance > 0.0))
        throw std::invalid_argument("IntegrationGrid: tail tolerance must be positive");
}

namespace {

Mat4 rotation_pair(double phi_mode1, double phi_mode2) {
    Mat4 rot;
    const double c1 = std::cos(phi_mode1), s1 = std::sin(phi_mode1);
    const double c2 = std::cos(phi_mode2), s2 = std::sin(phi_mode2);
    rot(0, 0) = c1;
    rot(0, 1) = -s1;
    rot(1, 0) = s1;
    rot(1, 1) = c1;
    rot(2, 2) = c2;
    rot(2, 3) = -s2;
    rot(3, 2) = s2;
    rot(3, 3) = c2;
    return rot;
}

void apply_loss(Mat4& sigma, std::size_t mode, double transmissivity) {
    const std::size_t base = 2 * mode;
    const double g = std::sqrt(transmissivity);
    for (std::size_t i = 0; i < 4; ++i) {
        sigma(base, i) *= g;
        sigma(base + 1, i) *= g;
        sigma(i, base) *= g;
        sigma(i, base + 1) *= g;
    }
    sigma(base, base) += 0.5 * (1.0 - transmissivity);
    sigma(base + 1, base + 1) += 0.5 * (1.0 - transmissivity);
}

}  // namespace

GaussianState build_state(const ModelParams& params) {
    params.validate();

    Mat4 sigma;
    sigma(0, 0) = sigma(1, 1) = params.n_b + 0.5;
    sigma(2, 2) = sigma(3, 3) = params.n_b_prime + 0.5;

    const double ch = std::cosh(params.r);
    const double sh = std::sinh(params.r);
    Mat4 squeeze;
    squeeze(0, 0) = ch;
    squeeze(0, 2) = sh;
    squeeze(1, 1) = ch;
    squeeze(1, 3) = -sh;
    squeeze(2, 0) = sh;
    squeeze(2, 2) = ch;
    squeeze(3, 1) = -sh;
    squeeze(3, 3) = ch;
    sigma = squeeze * sigma * transpose(squeeze);

    apply_loss(sigma, 0, params.epsilon);
    apply_loss(sigma, 1, params.epsilon_prime);

    const Mat4 rot = rotation_pair(params.phi_c, -params.phi_0);
    sigma = rot * sigma * transpose(rot);

    return GaussianState{sigma, Vec4{}};
}

GaussianState displaced(GaussianState state, const Vec4& mean) {
    state.mean = mean;
    return state;
}

double wigner_density(const GaussianState& state, const Vec4& point) {
    const Mat4 inv = inverse(state.covariance);
    const double d = det(state.covariance);
    Vec4 delta;
    for (std::size_t i = 0; i < 4; ++i) delta[i] = point[i] - state.mean[i];
    const double quad = dot(delta, mul(inv, delta));
    return std::exp(-0.5 * quad) / (4.0 * pi * pi * std::sqrt(d));
}

namespace {

// Covariance and mean of the rotated variables (X-, X+, y1, y2).
struct RotatedFrame {
    Mat4 cov;
    Vec4 mean;
};

RotatedFrame rotate_frame(const GaussianState& state) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Mat4 l;
    l(0, 0) = inv_sqrt2;
    l(0, 2) = -inv_sqrt2;
    l(1, 0) = inv_sqrt2;
    l(1, 2) = inv_sqrt2;
    l(2, 1) = 1.0;
    l(3, 3) = 1.0;
    RotatedFrame frame;
    frame.cov = l * state.covariance * transpose(l);
    frame.mean = mul(l, state.mean);
    return frame;
}

}  // namespace

double wigner_marginal_oracle(double x_minus, const GaussianState& state,
                              const IntegrationGrid& grid) {
    grid.validate();

    const RotatedFrame frame = rotate_frame(state);
    const double tail_bound = 3.0 * std::erfc(grid.half_width_sigmas / std::sqrt(2.0));
    if (tail_bound > grid.tail_tolerance)
        throw std::runtime_error("wigner_marginal_oracle: grid too small, tail mass above tolerance");

    // Squeezing makes the slice density extremely anisotropic, so the box is
    // aligned with the principal axes of the conditional covariance of
    // u = (X+, y1, y2) given X-, centered on the conditional mean. The
    // integrand itself stays the raw Wigner density.
    const double var_xm = frame.cov(0, 0);
    double center[3];
    std::vector<double> cond(9);
    for (std::size_t i = 0; i < 3; ++i) {
        center[i] = frame.mean[i + 1] + frame.cov(i + 1, 0) / var_xm * (x_minus - frame.mean[0]);
        for (std::size_t j = 0; j < 3; ++j)
            cond[i * 3 + j] =
                frame.cov(i + 1, j + 1) - frame.cov(i + 1, 0) * frame.cov(0, j + 1) / var_xm;
    }
    const EigenSystem axes = symmetric_eigensystem(cond, 3);
    double half[3];
    for (std::size_t i = 0; i < 3; ++i)
        half[i] = grid.half_width_sigmas * std::sqrt(std::max(axes.values[i], 0.0));

    const Mat4 inv = inverse(state.covariance);
    const double norm = 1.0 / (4.0 * pi * pi * std::sqrt(det(state.covariance)));
    const auto& rule = gauss_legendre(grid.points_per_axis);
    const std::size_t n = rule.nodes.size();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    auto axis = [&](std::size_t row, std::size_t col) { return axes.vectors[row * 3 + col]; };

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double za = half[0] * rule.nodes[i];
        double plane = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double zb = half[1] * rule.nodes[j];
            double line = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double zc = half[2] * rule.nodes[k];
                const double x_plus = center[0] + axis(0, 0) * za + axis(0, 1) * zb + axis(0, 2) * zc;
                const double y1 = center[1] + axis(1, 0) * za + axis(1, 1) * zb + axis(1, 2) * zc;
                const double y2 = center[2] + axis(2, 0) * za + axis(2, 1) * zb + axis(2, 2) * zc;
                const double q1 = (x_plus + x_minus) * inv_sqrt2 - state.mean[0];
                const double q2 = (x_plus - x_minus) * inv_sqrt2 - state.mean[2];
                const double p1 = y1 - state.mean[1];
                const double p2 = y2 - state.mean[3];
                const double quad =
                    inv(0, 0) * q1 * q1 + inv(1, 1) * p1 * p1 + inv(2, 2) * q2 * q2 +
                    inv(3, 3) * p2 * p2 + 2.0 * (inv(0, 1) * q1 * p1 + inv(0, 2) * q1 * q2 +
                                                 inv(0, 3) * q1 * p2 + inv(1, 2) * p1 * q2 +
                                                 inv(1, 3) * p1 * p2 + inv(2, 3) * q2 * p2);
                line += rule.weights[k] * std::exp(-0.5 * quad);
            }
            plane += rule.weights[j] * line;
        }
        sum += rule.weights[i] * plane;
    }
    // The rotation to principal axes is orthogonal; the volume element is
    // the product of half-widths alone.
    return sum * norm * half[0] * half[1] * half[2];
}

double wigner_marginal_oracle(double x_minus, const ModelParams& params,
                              const IntegrationGrid& grid) {
    return wigner_marginal_oracle(x_minus, build_state(params), grid);
}

MarginalMoments oracle_marginal_moments(const GaussianState& state, const IntegrationGrid& grid) {
    grid.validate();
    const RotatedFrame frame = rotate_frame(state);
    const double sd = std::sqrt(frame.cov(0, 0));
    const double lo = frame.mean[0] - grid.half_width_sigmas * sd;
    const double hi = frame.mean[0] + grid.half_width_sigmas * sd;

    auto density = [&](double x) { return wigner_marginal_oracle(x, state, grid); };

    const int panels = 8, points = 24;
    MarginalMoments moments;
    moments.mass = integrate_gl_panels(density, lo, hi, panels, points);
    const double first =
        integrate_gl_panels([&](double x) { return x * density(x); }, lo, hi, panels, points);
    moments.mean = first / moments.mass;
    const double second = integrate_gl_panels(
        [&](double x) { return (x - moments.mean) * (x - moments.mean) * density(x); }, lo, hi,
        panels, points);
    moments.variance = second / moments.mass;
    return moments;
}

}  // namespace cvqc
