#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cvqc/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Continuous-variable quantum compiler lab: landscapes, phase learning,"
                 " homodyne processing, parameter estimation"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    cvqc::cli::Overrides overrides;

    struct Verb {
        const char* name;
        const char* description;
    };
    const Verb verbs[] = {
        {"landscape", "Sweep the analytic (and optionally Monte Carlo) cost landscape"},
        {"qca", "Run the variational phase-learning loop"},
        {"precision", "Time-to-solution and precision study over a squeezing ladder"},
        {"fit", "Constrained least-squares fit of a measured landscape"},
        {"ingest", "Process a recorded voltage trace through both pipelines"},
        {"verify", "Run the independent-oracle check suite"},
    };

    std::string chosen;
    for (const Verb& verb : verbs) {
        CLI::App* sub = app.add_subcommand(verb.name, verb.description);
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--seed", overrides.seed, "Override the global seed");
        sub->add_option("--out", overrides.out_dir, "Output directory");
        sub->add_option("--samples", overrides.samples, "Override samples per evaluation");
        sub->add_option("--workers", overrides.workers, "Worker thread cap");
        if (std::string(verb.name) == "landscape")
            sub->add_flag("--mc", overrides.monte_carlo, "Also emit Monte Carlo sweeps");
        if (std::string(verb.name) == "fit")
            sub->add_option("--input", overrides.input, "Measured landscape CSV")->required();
        if (std::string(verb.name) == "ingest") {
            sub->add_option("--trace", overrides.trace, "Trace file (.f64 or .csv)")->required();
            sub->add_option("--sidecar", overrides.sidecar, "Calibration sidecar JSON")
                ->required();
        }
        sub->callback([&chosen, name = std::string(verb.name)] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return cvqc::cli::run_command(chosen, config_path, overrides, std::cout, std::cerr);
}
