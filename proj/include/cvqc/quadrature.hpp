#pragma once

#include <functional>
#include <vector>

namespace cvqc {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights for an n-point rule (Newton iteration on P_n).
const GaussLegendre& gauss_legendre(int n);

/// Integrate f over [lo, hi] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double lo, double hi, int n = 64);

/// Adaptive-ish convenience: integrate over [lo, hi] split into `panels`
/// equal panels, n points each. Used by tests for normalization checks.
double integrate_gl_panels(const std::function<double(double)>& f, double lo, double hi,
                           int panels, int n = 32);

}  // namespace cvqc
