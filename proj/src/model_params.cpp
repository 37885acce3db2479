#include "cvqc/model_params.hpp"

#include <stdexcept>
#include <string>

namespace cvqc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("ModelParams: ") + what);
}

}  // namespace

bool ModelParams::is_valid() const {
    return std::isfinite(r) && r >= 0.0 && std::isfinite(epsilon) && epsilon >= 0.0 &&
           epsilon <= 1.0 && std::isfinite(epsilon_prime) && epsilon_prime >= 0.0 &&
           epsilon_prime <= 1.0 && std::isfinite(n_b) && n_b >= 0.0 && std::isfinite(n_b_prime) &&
           n_b_prime >= 0.0 && std::isfinite(phi_0) && std::isfinite(phi_c);
}

void ModelParams::validate() const {
    require(std::isfinite(r) && r >= 0.0, "r must be finite and >= 0");
    require(std::isfinite(epsilon) && epsilon >= 0.0 && epsilon <= 1.0,
            "epsilon must lie in [0, 1]");
    require(std::isfinite(epsilon_prime) && epsilon_prime >= 0.0 && epsilon_prime <= 1.0,
            "epsilon_prime must lie in [0, 1]");
    require(std::isfinite(n_b) && n_b >= 0.0, "n_b must be finite and >= 0");
    require(std::isfinite(n_b_prime) && n_b_prime >= 0.0, "n_b_prime must be finite and >= 0");
    require(std::isfinite(phi_0), "phi_0 must be finite");
    require(std::isfinite(phi_c), "phi_c must be finite");
}

}  // namespace cvqc
