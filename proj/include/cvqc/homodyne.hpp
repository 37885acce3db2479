#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cvqc/model_params.hpp"

namespace cvqc {

enum class PipelineMethod { direct_variance, histogram_fit };

std::string to_string(PipelineMethod method);

struct TraceMeta {
    std::string source = "simulated";  ///< "simulated" or "ingested"
    std::uint64_t seed = 0;
    double gain_m = 1.0;  ///< volts per quadrature unit
};

/// Calibrated voltage-difference time series. The shot-noise calibration
/// sigma_snl_sq is the measured level, i.e. it includes the electronic
/// noise; the electronic-corrected level is sigma_snl_sq - sigma_e_sq.
struct HomodyneTrace {
    std::vector<double> samples;  ///< v- (volts)
    double sigma_snl_sq = 1.0;
    double sigma_e_sq = 0.0;
    TraceMeta meta;

    void validate() const;  ///< throws unless sigma_snl_sq > sigma_e_sq >= 0 and samples exist
};

/// One measured cost value with its statistical uncertainty.
struct CostEstimate {
    double cost = 0.0;              ///< -1/sqrt(2 pi variance_x_minus)
    double variance_x_minus = 0.0;  ///< quadrature units^2
    std::size_t n_samples = 0;
    double std_error = 0.0;  ///< standard error of `cost`
    PipelineMethod method = PipelineMethod::direct_variance;
};

/// n i.i.d. draws of X- from the zero-mean Gaussian with the closed-form
/// variance. Deterministic for a given seed.
std::vector<double> sample_diff_quadrature(const ModelParams& params, std::size_t n,
                                           std::uint64_t seed);

/// v_i = gain_m * sqrt(2) * x_i + mean_offset + e_i, with e_i drawn from
/// N(0, sigma_e_sq). Attaches sigma_snl_sq = gain_m^2 + sigma_e_sq (the
/// shot-noise level as measured, electronic noise included).
HomodyneTrace synthesize_voltage_trace(std::span<const double> x_samples, double gain_m,
                                       double mean_offset, double sigma_e_sq, std::uint64_t seed);

/// Histogram pipeline: rescale (v - mean)/sqrt(snl - e), fit a Gaussian to
/// the histogram, correct the fitted variance for electronic noise, halve.
CostEstimate process_trace_histogram(const HomodyneTrace& trace, int bins = 128);

/// Direct pipeline: sample variance of (v - mean), electronic-noise
/// corrected and scaled by the corrected shot-noise level, halved. Makes no
/// distributional assumption.
CostEstimate process_trace_direct(const HomodyneTrace& trace);

struct NoiseConfig {
    double gain_m = 1.0;
    double mean_offset = 0.0;
    double sigma_e_sq = 0.0;
    PipelineMethod pipeline = PipelineMethod::direct_variance;
    int histogram_bins = 128;
};

/// One full measurement window: sample, synthesize voltages, process.
/// Requires n_samples >= 1000.
CostEstimate cost_evaluator(const ModelParams& params, std::size_t n_samples,
                            const NoiseConfig& noise, std::uint64_t seed);

/// Binary trace format: little-endian float64 samples plus a JSON sidecar
/// { sigma_snl_sq, sigma_e_sq, gain_m, seed, source }.
void write_trace(const std::filesystem::path& data_path,
                 const std::filesystem::path& sidecar_path, const HomodyneTrace& trace);

/// Reads .f64 binary or .csv (one sample per line) depending on extension.
HomodyneTrace read_trace(const std::filesystem::path& data_path,
                         const std::filesystem::path& sidecar_path);

}  // namespace cvqc
