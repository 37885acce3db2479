#pragma once

#include <cmath>

#include "cvqc/util.hpp"

namespace cvqc {

/// Physical parameters of the noisy two-mode squeezed resource after the
/// phase gates and attenuation channels. All closed forms are functions of
/// this record. Quadrature convention: vacuum variance 1/2.
struct ModelParams {
    double r = 0.0;              ///< squeezing parameter, >= 0
    double epsilon = 1.0;        ///< conjugate transmissivity in [0, 1]
    double epsilon_prime = 1.0;  ///< probe transmissivity in [0, 1]
    double n_b = 0.0;            ///< conjugate seed excess noise, >= 0
    double n_b_prime = 0.0;      ///< probe seed excess noise, >= 0
    double phi_0 = 0.0;          ///< target phase (rad)
    double phi_c = 0.0;          ///< control phase (rad)

    /// N = sinh^2(r), photon number per mode of the vacuum resource.
    double mean_photons() const {
        const double s = std::sinh(r);
        return s * s;
    }

    /// Control-minus-target phase, reduced to (-pi, pi].
    double delta_phi() const { return wrap_to_pi(phi_c - phi_0); }

    /// Probe seed noise including shot noise: N_in = N'_B + 1/2.
    double n_in() const { return n_b_prime + 0.5; }

    bool is_valid() const;
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// Lossless, noise-free parameters at a given squeezing and phase offset.
    static ModelParams ideal(double r, double delta_phi = 0.0) {
        ModelParams p;
        p.r = r;
        p.phi_c = delta_phi;
        return p;
    }

    static ModelParams vacuum() { return ModelParams{}; }

    ModelParams with_delta_phi(double delta_phi) const {
        ModelParams p = *this;
        p.phi_c = p.phi_0 + delta_phi;
        return p;
    }
};

}  // namespace cvqc
