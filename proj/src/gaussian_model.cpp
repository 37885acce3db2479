#include "cvqc/gaussian_model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvqc/util.hpp"

namespace cvqc {

QuadraticForm2 homodyne_quadratic_form(const ModelParams& params) {
    params.validate();

    const double ns = params.mean_photons();
    const double k = 1.0 + params.n_b + params.n_b_prime;
    const double eps = params.epsilon;
    const double eps_p = params.epsilon_prime;
    const double coupling = std::sqrt(eps * eps_p) * k * std::sqrt(ns * (ns + 1.0));
    const double c = std::cos(params.delta_phi());

    QuadraticForm2 form;
    form.a(0, 0) = 1.0 + 2.0 * eps_p * (params.n_b_prime + k * ns);
    form.a(1, 1) = 1.0 + 2.0 * eps * (params.n_b + k * ns);
    form.a(0, 1) = form.a(1, 0) = -2.0 * coupling * c;
    form.f = (1.0 + 2.0 * eps * (params.n_b + k * ns)) *
                 (1.0 + 2.0 * eps_p * (params.n_b_prime + k * ns)) -
             4.0 * eps * eps_p * k * k * ns * (ns + 1.0) * c * c;
    return form;
}

double joint_q_density(double x1, double x2, const ModelParams& params) {
    const QuadraticForm2 form = homodyne_quadratic_form(params);
    const double quad =
        form.a(0, 0) * x1 * x1 + 2.0 * form.a(0, 1) * x1 * x2 + form.a(1, 1) * x2 * x2;
    return std::exp(-quad / form.f) / (pi * std::sqrt(form.f));
}

double diff_quadrature_variance(const ModelParams& params) {
    const QuadraticForm2 form = homodyne_quadratic_form(params);
    return 0.25 * form.sum_coefficient();
}

double marginal_diff_density(double x_minus, const ModelParams& params) {
    const double variance = diff_quadrature_variance(params);
    return std::exp(-x_minus * x_minus / (2.0 * variance)) / std::sqrt(2.0 * pi * variance);
}

Mat4 tmss_covariance(const ModelParams& params) {
    params.validate();
    if (params.n_b != 0.0)
        throw std::invalid_argument("tmss_covariance: requires a vacuum-seeded conjugate (n_b = 0)");

    const double n = params.mean_photons();
    const double k = 1.0 + params.n_b_prime;
    const double dphi = params.delta_phi();

    const double diag_conjugate = 0.5 * (1.0 + 2.0 * params.epsilon * n * k);
    const double diag_probe =
        0.5 * (1.0 + 2.0 * params.epsilon_prime * (n * k + params.n_b_prime));
    const double coupling = std::sqrt(params.epsilon * params.epsilon_prime) *
                            std::sqrt(n * (n + 1.0)) * k;
    const double c1 = coupling * std::cos(dphi);
    const double c2 = coupling * std::sin(dphi);

    Mat4 sigma;
    sigma(0, 0) = sigma(1, 1) = diag_conjugate;
    sigma(2, 2) = sigma(3, 3) = diag_probe;
    // q1q2 / p1p2 carry the cos part with opposite signs, q1p2 / p1q2 the sin part.
    sigma(0, 2) = sigma(2, 0) = c1;
    sigma(1, 3) = sigma(3, 1) = -c1;
    sigma(0, 3) = sigma(3, 0) = c2;
    sigma(1, 2) = sigma(2, 1) = c2;
    return sigma;
}

double uncertainty_defect(const Mat4& sigma) {
    // Hermitian H = Sigma + i*Omega/2 embeds into the real symmetric
    // [[Sigma, -Omega/2], [Omega/2, Sigma]]; eigenvalues coincide (doubled).
    Mat4 k;  // Omega/2 in (q1, p1, q2, p2) order
    k(0, 1) = 0.5;
    k(1, 0) = -0.5;
    k(2, 3) = 0.5;
    k(3, 2) = -0.5;

    std::vector<double> embed(64, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            embed[i * 8 + j] = sigma(i, j);
            embed[(i + 4) * 8 + (j + 4)] = sigma(i, j);
            embed[i * 8 + (j + 4)] = -k(i, j);
            embed[(i + 4) * 8 + j] = k(i, j);
        }
    }
    return symmetric_eigenvalues(std::move(embed), 8).front();
}

}  // namespace cvqc
