#include "cvqc/homodyne.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cvqc/gaussian_model.hpp"
#include "cvqc/rng.hpp"
#include "cvqc/stats.hpp"
#include "cvqc/util.hpp"

namespace cvqc {

std::string to_string(PipelineMethod method) {
    return method == PipelineMethod::direct_variance ? "direct-variance" : "histogram-fit";
}

void HomodyneTrace::validate() const {
    if (samples.empty()) throw std::invalid_argument("HomodyneTrace: no samples");
    if (!(sigma_e_sq >= 0.0) || !std::isfinite(sigma_e_sq))
        throw std::invalid_argument("HomodyneTrace: sigma_e_sq must be finite and >= 0");
    if (!(sigma_snl_sq > sigma_e_sq))
        throw std::invalid_argument("HomodyneTrace: sigma_snl_sq must exceed sigma_e_sq");
}

std::vector<double> sample_diff_quadrature(const ModelParams& params, std::size_t n,
                                           std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("sample_diff_quadrature: need n >= 2");
    const double sd = std::sqrt(diff_quadrature_variance(params));
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& x : out) x = sd * rng.normal();
    return out;
}

HomodyneTrace synthesize_voltage_trace(std::span<const double> x_samples, double gain_m,
                                       double mean_offset, double sigma_e_sq,
                                       std::uint64_t seed) {
    if (!(gain_m > 0.0) || !std::isfinite(gain_m))
        throw std::invalid_argument("synthesize_voltage_trace: gain must be positive");
    if (!(sigma_e_sq >= 0.0))
        throw std::invalid_argument("synthesize_voltage_trace: sigma_e_sq must be >= 0");
    if (x_samples.empty())
        throw std::invalid_argument("synthesize_voltage_trace: no input samples");

    const double scale = gain_m * std::sqrt(2.0);
    const double sigma_e = std::sqrt(sigma_e_sq);
    Rng rng(seed);

    HomodyneTrace trace;
    trace.samples.resize(x_samples.size());
    for (std::size_t i = 0; i < x_samples.size(); ++i) {
        double v = scale * x_samples[i] + mean_offset;
        if (sigma_e > 0.0) v += sigma_e * rng.normal();
        trace.samples[i] = v;
    }
    trace.sigma_snl_sq = gain_m * gain_m + sigma_e_sq;
    trace.sigma_e_sq = sigma_e_sq;
    trace.meta = TraceMeta{"simulated", seed, gain_m};
    return trace;
}

namespace {

CostEstimate finish_estimate(double sigma_sq, double sigma_sq_std_error, std::size_t n,
                             PipelineMethod method) {
    const double variance = 0.5 * sigma_sq;
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw std::runtime_error("trace processing: corrected variance is not positive");
    CostEstimate est;
    est.variance_x_minus = variance;
    est.cost = -1.0 / std::sqrt(2.0 * pi * variance);
    est.n_samples = n;
    // d|C|/dV = |C| / (2V); variance of X- carries half the sigma^2 error.
    const double variance_std_error = 0.5 * sigma_sq_std_error;
    est.std_error = std::abs(est.cost) / (2.0 * variance) * variance_std_error;
    est.method = method;
    return est;
}

}  // namespace

CostEstimate process_trace_direct(const HomodyneTrace& trace) {
    trace.validate();
    if (trace.samples.size() < 2)
        throw std::invalid_argument("process_trace_direct: need >= 2 samples");

    const double n = static_cast<double>(trace.samples.size());
    const double denom = trace.sigma_snl_sq - trace.sigma_e_sq;
    const double sigma_d_sq = sample_variance(trace.samples);
    const double sigma_sq = (sigma_d_sq - trace.sigma_e_sq) / denom;
    // Chi-square spread of the raw variance estimate, propagated through the
    // (constant) calibration.
    const double sigma_d_sq_err = sigma_d_sq * std::sqrt(2.0 / (n - 1.0));
    return finish_estimate(sigma_sq, sigma_d_sq_err / denom, trace.samples.size(),
                           PipelineMethod::direct_variance);
}

CostEstimate process_trace_histogram(const HomodyneTrace& trace, int bins) {
    trace.validate();
    if (bins < 16) throw std::invalid_argument("process_trace_histogram: need >= 16 bins");
    if (trace.samples.size() < 64)
        throw std::invalid_argument("process_trace_histogram: too few samples");

    const double denom = trace.sigma_snl_sq - trace.sigma_e_sq;
    const double mu_v = mean(trace.samples);
    const double root = std::sqrt(denom);

    std::vector<double> scaled(trace.samples.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = (trace.samples[i] - mu_v) / root;

    const double spread = std::sqrt(sample_variance(scaled));
    if (!(spread > 0.0)) throw std::runtime_error("process_trace_histogram: degenerate trace");

    const Histogram hist = make_histogram(scaled, -6.0 * spread, 6.0 * spread, bins);
    const GaussianFit fit = fit_gaussian_histogram(hist);
    if (!fit.converged) throw std::runtime_error("process_trace_histogram: histogram fit failed");

    const double sigma_sd_sq = fit.variance;
    const double sigma_sq = sigma_sd_sq - trace.sigma_e_sq / denom;
    const double n = static_cast<double>(trace.samples.size());
    const double sigma_sd_sq_err = sigma_sd_sq * std::sqrt(2.0 / (n - 1.0));
    return finish_estimate(sigma_sq, sigma_sd_sq_err, trace.samples.size(),
                           PipelineMethod::histogram_fit);
}

CostEstimate cost_evaluator(const ModelParams& params, std::size_t n_samples,
                            const NoiseConfig& noise, std::uint64_t seed) {
    if (n_samples < 1000) throw std::invalid_argument("cost_evaluator: need n_samples >= 1000");
    const std::vector<double> x = sample_diff_quadrature(params, n_samples, derive_seed(seed, 1));
    const HomodyneTrace trace = synthesize_voltage_trace(x, noise.gain_m, noise.mean_offset,
                                                         noise.sigma_e_sq, derive_seed(seed, 2));
    return noise.pipeline == PipelineMethod::histogram_fit
               ? process_trace_histogram(trace, noise.histogram_bins)
               : process_trace_direct(trace);
}

namespace {

void byteswap_if_needed(std::vector<double>& values) {
    if constexpr (std::endian::native == std::endian::little) {
        (void)values;
    } else {
        for (double& v : values) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            bits = __builtin_bswap64(bits);
            std::memcpy(&v, &bits, 8);
        }
    }
}

}  // namespace

void write_trace(const std::filesystem::path& data_path,
                 const std::filesystem::path& sidecar_path, const HomodyneTrace& trace) {
    trace.validate();
    std::vector<double> samples = trace.samples;
    byteswap_if_needed(samples);
    std::ofstream data(data_path, std::ios::binary);
    if (!data) throw std::runtime_error("write_trace: cannot open " + data_path.string());
    data.write(reinterpret_cast<const char*>(samples.data()),
               static_cast<std::streamsize>(samples.size() * sizeof(double)));
    if (!data) throw std::runtime_error("write_trace: write failed for " + data_path.string());

    nlohmann::json sidecar{{"sigma_snl_sq", trace.sigma_snl_sq},
                           {"sigma_e_sq", trace.sigma_e_sq},
                           {"gain_m", trace.meta.gain_m},
                           {"seed", trace.meta.seed},
                           {"source", trace.meta.source}};
    std::ofstream meta(sidecar_path);
    if (!meta) throw std::runtime_error("write_trace: cannot open " + sidecar_path.string());
    meta << sidecar.dump(2) << '\n';
}

HomodyneTrace read_trace(const std::filesystem::path& data_path,
                         const std::filesystem::path& sidecar_path) {
    std::ifstream meta(sidecar_path);
    if (!meta) throw std::invalid_argument("read_trace: missing calibration sidecar " +
                                        sidecar_path.string());
    nlohmann::json sidecar;
    try {
        meta >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("read_trace: bad sidecar JSON: " + std::string(e.what()));
    }

    HomodyneTrace trace;
    try {
        trace.sigma_snl_sq = sidecar.at("sigma_snl_sq").get<double>();
        trace.sigma_e_sq = sidecar.at("sigma_e_sq").get<double>();
        trace.meta.gain_m = sidecar.value("gain_m", 1.0);
        trace.meta.seed = sidecar.value("seed", 0ULL);
        trace.meta.source = sidecar.value("source", "ingested");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("read_trace: calibration missing from sidecar: " +
                                    std::string(e.what()));
    }

    if (data_path.extension() == ".csv") {
        std::ifstream in(data_path);
        if (!in) throw std::runtime_error("read_trace: cannot open " + data_path.string());
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) continue;
            try {
                trace.samples.push_back(std::stod(line));
            } catch (const std::exception&) {
                throw std::invalid_argument("read_trace: bad sample at " + data_path.string() +
                                         ":" + std::to_string(row));
            }
        }
    } else {
        std::ifstream in(data_path, std::ios::binary | std::ios::ate);
        if (!in) throw std::runtime_error("read_trace: cannot open " + data_path.string());
        const auto bytes = static_cast<std::size_t>(in.tellg());
        if (bytes % sizeof(double) != 0)
            throw std::invalid_argument("read_trace: truncated float64 stream " +
                                     data_path.string());
        in.seekg(0);
        trace.samples.resize(bytes / sizeof(double));
        in.read(reinterpret_cast<char*>(trace.samples.data()),
                static_cast<std::streamsize>(bytes));
        if (!in) throw std::runtime_error("read_trace: read failed for " + data_path.string());
        byteswap_if_needed(trace.samples);
    }

    trace.validate();
    return trace;
}

}  // namespace cvqc
