#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cvqc::cli {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> samples;
    std::optional<unsigned> workers;
    bool monte_carlo = false;
    std::optional<std::string> input;    ///< fit: landscape CSV path
    std::optional<std::string> trace;    ///< ingest: sample file path
    std::optional<std::string> sidecar;  ///< ingest: calibration JSON path
};

/// Dispatch a CLI verb. Returns the process exit code:
/// 0 success, 2 config/validation error, 3 runtime/fit failure,
/// 4 verify-suite failure.
int run_command(const std::string& verb, const std::optional<std::string>& config_path,
                const Overrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace cvqc::cli
