#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cvqc {

/// Residual evaluator: fill `residuals` for the given parameter vector.
/// Residuals must already carry any weighting.
using ResidualFn = std::function<void(std::span<const double>, std::span<double>)>;

struct LevMarOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-12;
    double step_tol = 1e-14;
    double initial_lambda = 1e-3;
};

struct LevMarResult {
    std::vector<double> params;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Box-constrained Levenberg-Marquardt with a forward-difference Jacobian.
/// Trial steps are projected onto [lower, upper]; pass +-inf entries for
/// unconstrained parameters.
LevMarResult levmar_fit(const ResidualFn& fn, std::size_t n_residuals,
                        std::vector<double> initial, std::span<const double> lower,
                        std::span<const double> upper, const LevMarOptions& options = {});

}  // namespace cvqc
