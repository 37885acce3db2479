#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cvqc/homodyne.hpp"
#include "cvqc/model_params.hpp"

namespace cvqc {

/// Cost function: the negative of the difference-quadrature marginal density
/// at X- = 0, i.e. -sqrt(2 / (pi (trA + 2 A12))). Always negative; its global
/// minimum over delta_phi sits at delta_phi = 0.
double cost(const ModelParams& params);

/// cost / |cost at delta_phi = 0| for the same physical parameters.
/// Equals -1 at delta_phi = 0. Requires r > 0.
double normalized_cost(const ModelParams& params);

/// Curvature of the normalized cost at the minimum: the normalized cost
/// behaves as -1 + f(N) dphi^2 / 2 for small dphi (ideal parameters), with
/// f(N) = sqrt(N(N+1)) (2 sqrt(N(N+1)) + 2N + 1).
/// f(0) = 0, strictly increasing, f(N)/(2N^2) -> 2 for large N.
double quadratic_coefficient_f(double n_photons);

/// Pure two-mode squeezed state seeded with equal real coherent amplitudes.
struct SeededParams {
    double r = 0.0;      ///< squeezing parameter, >= 0
    double alpha = 0.0;  ///< real coherent amplitude per mode
    double phi_0 = 0.0;  ///< target phase (rad)
    double phi_c = 0.0;  ///< control phase (rad)

    double delta_phi() const { return wrap_to_pi(phi_c - phi_0); }
    /// Total energy per mode, alpha^2 e^{2r} + sinh^2 r.
    double mean_photons() const;
    void validate() const;
};

/// Normalized seeded cost: minus the joint density at the most likely
/// quadrature point, divided by its delta_phi = 0 magnitude. Equals -1 at
/// delta_phi = 0; quartic in delta_phi when r = 0 with coefficient N/2.
double seeded_cost(const SeededParams& params);

struct LandscapeRow {
    double delta_phi = 0.0;
    double cost = 0.0;
    double variance = 0.0;
    std::optional<double> cost_stderr;
};

struct LandscapeTable {
    std::vector<LandscapeRow> rows;

    /// Columns: delta_phi_rad, cost, variance[, cost_stderr].
    void write_csv(std::ostream& out) const;
    static LandscapeTable read_csv(std::istream& in);
};

/// One analytic row per grid point. Grid must be non-empty and strictly
/// increasing.
LandscapeTable landscape_sweep(const ModelParams& base, std::span<const double> delta_phi_grid);

/// Monte Carlo variant: every row is measured through the sampling pipeline
/// with an independent sub-stream of `seed`, and carries its standard error.
LandscapeTable landscape_sweep_mc(const ModelParams& base, std::span<const double> delta_phi_grid,
                                  std::size_t n_samples, const NoiseConfig& noise,
                                  std::uint64_t seed);

/// Full width at half depth of a swept cost dip: width between the two
/// crossings of (max+min)/2 around the minimum. Throws when the profile
/// does not bracket a minimum within the table.
double dip_fwhm(std::span<const double> delta_phi, std::span<const double> cost);

}  // namespace cvqc
