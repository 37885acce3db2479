#pragma once

#include "cvqc/linalg.hpp"
#include "cvqc/model_params.hpp"

namespace cvqc {

/// The exponent of the joint q-quadrature density written as a quadratic
/// form: P(x1, x2) = exp(-x^T a x / f) / (pi sqrt(f)). `a` is symmetric
/// positive definite and f = det(a), so the density is normalized.
struct QuadraticForm2 {
    Mat2 a;
    double f = 1.0;

    double trace() const { return a.trace(); }
    double off_diagonal() const { return a(0, 1); }

    /// trA + 2*A12. Four times the variance of the difference quadrature
    /// X- = (x1 - x2)/sqrt(2); strictly positive for valid parameters.
    double sum_coefficient() const { return trace() + 2.0 * off_diagonal(); }

    /// trA - 2*A12. Four times the variance of the sum quadrature X+.
    double diff_coefficient() const { return trace() - 2.0 * off_diagonal(); }
};

/// Quadratic form of the homodyne joint density for the noisy, attenuated
/// two-mode squeezed state, with both seed noises n_b and n_b_prime.
QuadraticForm2 homodyne_quadratic_form(const ModelParams& params);

/// Joint density of the two amplitude quadratures, P(x1, x2).
double joint_q_density(double x1, double x2, const ModelParams& params);

/// Marginal density of X- = (x1 - x2)/sqrt(2): a zero-mean Gaussian with
/// variance (trA + 2*A12)/4, peaked at X- = 0.
double marginal_diff_density(double x_minus, const ModelParams& params);

/// Variance of the difference quadrature, (trA + 2*A12)/4.
/// Vacuum value 1/2; ideal parameters at delta_phi = 0 give exp(-2r)/2.
double diff_quadrature_variance(const ModelParams& params);

/// 4x4 covariance of the state in quadrature order (q1, p1, q2, p2),
/// vacuum variance 1/2. Mode 1 is the conjugate, mode 2 the probe.
/// Requires n_b == 0 (the conjugate is seeded by vacuum in this form).
Mat4 tmss_covariance(const ModelParams& params);

/// Smallest eigenvalue of the Hermitian matrix Sigma + i*Omega/2, computed
/// through its real symmetric embedding. Physical states give >= 0 up to
/// rounding; used to check the uncertainty relation.
double uncertainty_defect(const Mat4& sigma);

}  // namespace cvqc
