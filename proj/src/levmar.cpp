#include "cvqc/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvqc {

namespace {

double rss_of(std::span<const double> residuals) {
    double s = 0.0;
    for (double r : residuals) s += r * r;
    return s;
}

// Solve the small dense symmetric system a x = b in place (Gauss, partial pivot).
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        if (std::abs(a[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] / a[col * n + col];
            for (std::size_t j = col; j < n; ++j) a[row * n + j] -= f * a[col * n + j];
            b[row] -= f * b[col];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * b[j];
        b[ii] = s / a[ii * n + ii];
    }
    return true;
}

}  // namespace

LevMarResult levmar_fit(const ResidualFn& fn, std::size_t n_residuals,
                        std::vector<double> initial, std::span<const double> lower,
                        std::span<const double> upper, const LevMarOptions& options) {
    const std::size_t p = initial.size();
    if (p == 0) throw std::invalid_argument("levmar: no parameters");
    if (lower.size() != p || upper.size() != p)
        throw std::invalid_argument("levmar: bound size mismatch");

    auto clamp = [&](std::vector<double>& theta) {
        for (std::size_t j = 0; j < p; ++j) theta[j] = std::clamp(theta[j], lower[j], upper[j]);
    };
    clamp(initial);

    std::vector<double> residuals(n_residuals), trial_res(n_residuals);
    std::vector<double> jac(n_residuals * p);
    std::vector<double> theta = std::move(initial);

    fn(theta, residuals);
    double rss = rss_of(residuals);
    double lambda = options.initial_lambda;

    LevMarResult result;
    result.params = theta;
    result.rss = rss;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;

        // Forward-difference Jacobian, flipping direction at an upper bound.
        for (std::size_t j = 0; j < p; ++j) {
            const double h0 = 1e-7 * std::max(1.0, std::abs(theta[j]));
            double h = (theta[j] + h0 <= upper[j]) ? h0 : -h0;
            std::vector<double> pert = theta;
            pert[j] += h;
            clamp(pert);
            h = pert[j] - theta[j];
            if (h == 0.0) {
                for (std::size_t i = 0; i < n_residuals; ++i) jac[i * p + j] = 0.0;
                continue;
            }
            fn(pert, trial_res);
            for (std::size_t i = 0; i < n_residuals; ++i)
                jac[i * p + j] = (trial_res[i] - residuals[i]) / h;
        }

        // Normal equations.
        std::vector<double> jtj(p * p, 0.0), jtr(p, 0.0);
        for (std::size_t i = 0; i < n_residuals; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                const double jij = jac[i * p + j];
                jtr[j] += jij * residuals[i];
                for (std::size_t k = j; k < p; ++k) jtj[j * p + k] += jij * jac[i * p + k];
            }
        }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < j; ++k) jtj[j * p + k] = jtj[k * p + j];

        double gmax = 0.0;
        for (double g : jtr) gmax = std::max(gmax, std::abs(g));
        if (gmax < options.gradient_tol) {
            result.converged = true;
            break;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 32; ++attempt) {
            std::vector<double> a = jtj;
            for (std::size_t j = 0; j < p; ++j) a[j * p + j] += lambda * std::max(jtj[j * p + j], 1e-12);
            std::vector<double> delta = jtr;
            for (double& d : delta) d = -d;
            if (!solve_dense(a, delta, p)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> trial = theta;
            for (std::size_t j = 0; j < p; ++j) trial[j] += delta[j];
            clamp(trial);

            double step_norm = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double d = trial[j] - theta[j];
                step_norm += d * d;
            }
            if (std::sqrt(step_norm) < options.step_tol) {
                result.converged = true;
                stepped = false;
                break;
            }

            fn(trial, trial_res);
            const double trial_rss = rss_of(trial_res);
            if (std::isfinite(trial_rss) && trial_rss < rss) {
                theta = std::move(trial);
                residuals = trial_res;
                rss = trial_rss;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                break;
            }
            lambda *= 10.0;
        }

        result.params = theta;
        result.rss = rss;
        if (!stepped) {
            if (!result.converged) result.converged = (gmax < 1e6 * options.gradient_tol);
            break;
        }
    }

    result.params = theta;
    result.rss = rss;
    return result;
}

}  // namespace cvqc
