#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cvqc/gaussian_model.hpp"
#include "cvqc/homodyne.hpp"
#include "cvqc/stats.hpp"
#include "cvqc/util.hpp"

using namespace cvqc;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "cvqc_homodyne_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("sampling is deterministic and matches the closed-form variance") {
    const ModelParams vacuum = ModelParams::vacuum();
    const auto a = sample_diff_quadrature(vacuum, 1000000, 42);
    const auto b = sample_diff_quadrature(vacuum, 1000000, 42);
    CHECK(a == b);

    const double v = sample_variance(a);
    const double se = 0.5 * std::sqrt(2.0 / 1000000.0);
    CHECK(std::abs(v - 0.5) < 5.0 * se);

    const ModelParams squeezed = ModelParams::ideal(0.74);
    const auto x = sample_diff_quadrature(squeezed, 10000000, 43);
    const double truth = 0.5 * std::exp(-2.0 * 0.74);
    CHECK(std::abs(sample_variance(x) - truth) < 5.0 * truth * std::sqrt(2.0 / 10000000.0));

    CHECK_THROWS_AS(sample_diff_quadrature(vacuum, 1, 1), std::invalid_argument);
}

TEST_CASE("voltage synthesis scales the quadrature variance by 2 m^2") {
    const auto x = sample_diff_quadrature(ModelParams::ideal(0.35), 50000, 7);
    const HomodyneTrace trace = synthesize_voltage_trace(x, 1.0, 0.0, 0.0, 8);
    CHECK(sample_variance(trace.samples) == doctest::Approx(2.0 * sample_variance(x)));
    CHECK(trace.sigma_snl_sq == doctest::Approx(1.0));
    CHECK(trace.sigma_e_sq == 0.0);
    CHECK_THROWS_AS(synthesize_voltage_trace(x, 0.0, 0.0, 0.0, 8), std::invalid_argument);
}

TEST_CASE("both pipelines are invariant under a constant offset") {
    const auto x = sample_diff_quadrature(ModelParams::ideal(0.35, 0.4), 100000, 11);
    const HomodyneTrace base = synthesize_voltage_trace(x, 0.9, 0.0, 0.05, 12);
    HomodyneTrace shifted = base;
    for (double& v : shifted.samples) v += 5.0;

    const CostEstimate d0 = process_trace_direct(base);
    const CostEstimate d1 = process_trace_direct(shifted);
    CHECK(std::abs(d0.cost - d1.cost) < 1e-12);

    const CostEstimate h0 = process_trace_histogram(base);
    const CostEstimate h1 = process_trace_histogram(shifted);
    CHECK(std::abs(h0.cost - h1.cost) < 1e-12);
}

TEST_CASE("electronic-noise correction recovers the noiseless variance") {
    const ModelParams p = ModelParams::ideal(0.35, 0.2);
    const double truth = diff_quadrature_variance(p);
    const auto x = sample_diff_quadrature(p, 400000, 21);
    const double gain = 1.3;

    for (double ratio : {0.0, 0.1, 0.3, 0.5}) {
        // sigma_e as a fraction of the measured shot-noise level.
        const double sigma_e_sq = ratio / (1.0 - ratio) * gain * gain;
        const HomodyneTrace trace = synthesize_voltage_trace(x, gain, 0.25, sigma_e_sq, 22);
        const CostEstimate direct = process_trace_direct(trace);
        const CostEstimate hist = process_trace_histogram(trace);
        CHECK(std::abs(direct.variance_x_minus - truth) < 6.0 * truth * std::sqrt(2.0 / 400000.0) *
                                                              (1.0 + 2.0 * ratio));
        // Same trace, so the two estimates must agree tightly.
        const double combined = std::sqrt(direct.std_error * direct.std_error +
                                          hist.std_error * hist.std_error);
        CHECK(std::abs(direct.cost - hist.cost) <= 3.0 * combined);
    }
}

TEST_CASE("degenerate traces are rejected") {
    HomodyneTrace trace;
    trace.samples.assign(5000, 1.25);  // constant voltage
    trace.sigma_snl_sq = 1.0;
    trace.sigma_e_sq = 0.0;
    CHECK_THROWS_AS(process_trace_histogram(trace), std::runtime_error);

    trace.sigma_e_sq = 1.0;  // equals the shot-noise level
    CHECK_THROWS_AS(process_trace_direct(trace), std::invalid_argument);

    // Electronic noise above the measured spread drives the corrected
    // variance negative.
    HomodyneTrace quiet;
    const auto x = sample_diff_quadrature(ModelParams::ideal(0.9), 5000, 33);
    quiet = synthesize_voltage_trace(x, 1.0, 0.0, 0.0, 34);
    quiet.sigma_e_sq = 0.9;
    quiet.sigma_snl_sq = 1.9;
    CHECK_THROWS_AS(process_trace_direct(quiet), std::runtime_error);
}

TEST_CASE("direct variance estimator error follows the chi-square law") {
    const ModelParams p = ModelParams::ideal(0.5);
    const double truth = diff_quadrature_variance(p);
    const std::size_t n = 2000;
    std::vector<double> estimates;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto x = sample_diff_quadrature(p, n, derive_seed(1234, seed));
        const HomodyneTrace trace = synthesize_voltage_trace(x, 1.0, 0.0, 0.0, 1);
        estimates.push_back(process_trace_direct(trace).variance_x_minus);
    }
    const double observed_sd = std::sqrt(sample_variance(estimates));
    const double predicted_sd = truth * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(observed_sd == doctest::Approx(predicted_sd).epsilon(0.2));
}

TEST_CASE("cost evaluator determinism, pre-conditions, and error bars") {
    const ModelParams p = ModelParams::ideal(0.74, 0.5);
    const CostEstimate a = cost_evaluator(p, 100000, NoiseConfig{}, 5);
    const CostEstimate b = cost_evaluator(p, 100000, NoiseConfig{}, 5);
    CHECK(a.cost == b.cost);
    CHECK(a.std_error == b.std_error);
    CHECK(a.std_error <= 0.01 * std::abs(a.cost));
    CHECK_THROWS_AS(cost_evaluator(p, 100, NoiseConfig{}, 5), std::invalid_argument);

    NoiseConfig hist;
    hist.pipeline = PipelineMethod::histogram_fit;
    const CostEstimate c = cost_evaluator(p, 100000, hist, 5);
    CHECK(c.method == PipelineMethod::histogram_fit);
    CHECK(std::abs(c.cost - a.cost) < 4.0 * a.std_error);
}

TEST_CASE("trace files round-trip through binary and csv") {
    const auto dir = temp_dir();
    const auto x = sample_diff_quadrature(ModelParams::ideal(0.4, 0.1), 4096, 55);
    const HomodyneTrace trace = synthesize_voltage_trace(x, 1.1, 0.2, 0.05, 56);

    const auto bin = dir / "trace.f64";
    const auto sidecar = dir / "trace.json";
    write_trace(bin, sidecar, trace);
    const HomodyneTrace back = read_trace(bin, sidecar);
    CHECK(back.samples == trace.samples);
    CHECK(back.sigma_snl_sq == trace.sigma_snl_sq);
    CHECK(back.sigma_e_sq == trace.sigma_e_sq);

    const auto csv = dir / "trace.csv";
    {
        std::ofstream out(csv);
        for (double v : trace.samples) out << format_double(v) << '\n';
    }
    const HomodyneTrace from_csv = read_trace(csv, sidecar);
    CHECK(from_csv.samples == trace.samples);

    const CostEstimate est_bin = process_trace_direct(back);
    const CostEstimate est_csv = process_trace_direct(from_csv);
    CHECK(est_bin.cost == est_csv.cost);

    CHECK_THROWS_AS(read_trace(bin, dir / "missing.json"), std::invalid_argument);
    std::filesystem::remove_all(dir);
}
