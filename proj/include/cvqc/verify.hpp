#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cvqc/model_params.hpp"

namespace cvqc {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;   ///< worst observed deviation
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 20240901;
    int oracle_draws = 50;
    int round_trip_draws = 1000;
};

/// Closed-form marginal signature, injectable so a corrupted implementation
/// is demonstrably caught by the equivalence check.
using MarginalFn = std::function<double(double x_minus, const ModelParams&)>;

/// Closed-form marginal against the brute-force Wigner integration at random
/// parameter draws; reports the worst absolute deviation.
VerifyCheck oracle_equivalence_check(const MarginalFn& marginal, std::uint64_t seed, int draws,
                                     double tolerance = 1e-6);

/// The full suite of independent-oracle checks at desk scale.
std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& options = {});

}  // namespace cvqc
