#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cvqc/model_params.hpp"
#include "cvqc/rng.hpp"

namespace cvqc::test {

inline ModelParams random_params(Rng& rng) {
    ModelParams p;
    p.r = rng.uniform(0.0, 1.5);
    p.epsilon = rng.uniform(0.3, 1.0);
    p.epsilon_prime = rng.uniform(0.3, 1.0);
    p.n_b_prime = rng.uniform(0.0, 2.0);
    p.phi_c = rng.uniform(-pi, pi);
    return p;
}

/// Two-sample Kolmogorov-Smirnov test; true when the null (same
/// distribution) is NOT rejected at the given level.
inline bool ks_compatible(std::vector<double> a, std::vector<double> b, double alpha = 0.05) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / na;
        const double fb = static_cast<double>(j) / nb;
        d = std::max(d, std::abs(fa - fb));
    }

    const double c = alpha == 0.01 ? 1.628 : 1.358;  // 5% default
    const double critical = c * std::sqrt((na + nb) / (na * nb));
    return d <= critical;
}

}  // namespace cvqc::test
