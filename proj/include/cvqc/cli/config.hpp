#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvqc/param_estimation.hpp"
#include "cvqc/qca.hpp"
#include "cvqc/verify.hpp"

namespace cvqc::cli {

using Json = nlohmann::json;

/// Rejects keys outside `allowed`; errors name the context and the key.
void require_known_keys(const Json& obj, const std::vector<std::string>& allowed,
                        const std::string& context);

struct GlobalConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    unsigned workers = 0;  ///< 0 = hardware concurrency
};

struct LandscapeCmdConfig {
    std::vector<double> r_values{0.18, 0.35, 0.74};
    ModelParams base;
    double grid_start = -cvqc::pi;
    double grid_stop = cvqc::pi;
    int grid_points = 201;
    bool monte_carlo = false;
    std::size_t samples = 100000;
    NoiseConfig noise;
};

struct QcaScenario {
    double phi_0 = 0.0;
    double initial_phi_c = 3.0;
};

struct QcaCmdConfig {
    QcaConfig engine;
    std::vector<QcaScenario> scenarios;  ///< always at least one
};

struct PrecisionCmdConfig {
    QcaConfig engine;
    std::vector<double> r_values{0.18, 0.35, 0.74};
    std::size_t n_runs = 5;
    bool randomize_init_sign = true;
};

struct FitCmdConfig {
    FitOptions options;
    bool compare_noisy_readout = false;
};

struct IngestCmdConfig {
    int histogram_bins = 128;
};

/// Parsed top-level configuration file. Sections for all commands may
/// coexist; anything else is rejected.
struct ConfigFile {
    GlobalConfig global;
    Json raw;  ///< original document (for provenance hashing)

    LandscapeCmdConfig landscape() const;
    QcaCmdConfig qca() const;
    PrecisionCmdConfig precision() const;
    FitCmdConfig fit() const;
    IngestCmdConfig ingest() const;
    VerifyOptions verify() const;

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);
    static ConfigFile defaults();
};

}  // namespace cvqc::cli
