#include "cvqc/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "cvqc/cli/config.hpp"
#include "cvqc/cost_landscape.hpp"
#include "cvqc/gaussian_model.hpp"
#include "cvqc/param_estimation.hpp"
#include "cvqc/qca.hpp"
#include "cvqc/util.hpp"
#include "cvqc/verify.hpp"

namespace cvqc::cli {

namespace {

constexpr const char* kVersion = "cvqc 1.0.0";

/// Collects output files in memory, then writes them together with a
/// summary listing every file with a content checksum.
class StudyWriter {
public:
    StudyWriter(std::filesystem::path dir, std::string command, const ConfigFile& config)
        : dir_(std::move(dir)), command_(std::move(command)) {
        config_checksum_ = fnv1a64_hex(config.raw.dump());
        seed_ = config.global.seed;
    }

    void add_file(const std::string& name, const std::string& content) {
        entries_.push_back({name, content});
    }

    void flush(std::ostream& log) {
        std::filesystem::create_directories(dir_);
        Json files = Json::array();
        for (const auto& [name, content] : entries_) {
            const std::filesystem::path path = dir_ / name;
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + path.string());
            out << content;
            files.push_back(Json{{"path", name},
                                 {"bytes", content.size()},
                                 {"checksum_fnv1a64", fnv1a64_hex(content)}});
            log << "wrote " << path.string() << '\n';
        }
        Json summary{{"command", command_},
                     {"version", kVersion},
                     {"seed", seed_},
                     {"config_checksum_fnv1a64", config_checksum_},
                     {"files", files}};
        const std::filesystem::path path = dir_ / "summary.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << summary.dump(2) << '\n';
        log << "wrote " << path.string() << '\n';
    }

private:
    std::filesystem::path dir_;
    std::string command_;
    std::string config_checksum_;
    std::uint64_t seed_ = 0;
    std::vector<std::pair<std::string, std::string>> entries_;
};

ConfigFile load_config(const std::optional<std::string>& path, const Overrides& overrides) {
    ConfigFile cfg = path ? ConfigFile::load(*path) : ConfigFile::defaults();
    if (overrides.seed) cfg.global.seed = *overrides.seed;
    if (overrides.out_dir) cfg.global.out_dir = *overrides.out_dir;
    if (overrides.workers) cfg.global.workers = *overrides.workers;
    return cfg;
}

std::vector<double> make_grid(double start, double stop, int points) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = start + step * i;
    return grid;
}

int cmd_landscape(const ConfigFile& config, const Overrides& overrides, std::ostream& out) {
    LandscapeCmdConfig cmd = config.landscape();
    if (overrides.monte_carlo) cmd.monte_carlo = true;
    if (overrides.samples) cmd.samples = *overrides.samples;
    cmd.base.validate();

    const std::vector<double> grid = make_grid(cmd.grid_start, cmd.grid_stop, cmd.grid_points);
    StudyWriter writer(config.global.out_dir, "landscape", config);

    for (std::size_t i = 0; i < cmd.r_values.size(); ++i) {
        ModelParams base = cmd.base;
        base.r = cmd.r_values[i];
        const std::string tag = "landscape_r" + format_double(cmd.r_values[i]);

        std::ostringstream analytic;
        landscape_sweep(base, grid).write_csv(analytic);
        writer.add_file(tag + ".csv", analytic.str());

        if (cmd.monte_carlo) {
            std::ostringstream mc;
            landscape_sweep_mc(base, grid, cmd.samples, cmd.noise,
                               derive_seed(config.global.seed, i, 0x4c))
                .write_csv(mc);
            writer.add_file(tag + "_mc.csv", mc.str());
        }
    }
    writer.flush(out);
    return 0;
}

int cmd_qca(const ConfigFile& config, const Overrides& overrides, std::ostream& out) {
    QcaCmdConfig cmd = config.qca();
    if (overrides.samples) cmd.engine.samples_per_iteration = *overrides.samples;
    cmd.engine.validate();

    StudyWriter writer(config.global.out_dir, "qca", config);
    std::ostringstream roster;
    roster << "run,phi_0_rad,initial_phi_c_rad,converged,t_opt,post_mean_dphi_rad,failed_to_train\n";

    std::vector<QcaConfig> run_cfgs(cmd.scenarios.size(), cmd.engine);
    std::vector<QcaRunRecord> records(cmd.scenarios.size());
    parallel_for(cmd.scenarios.size(), config.global.workers, [&](std::size_t i) {
        run_cfgs[i].model.phi_0 = cmd.scenarios[i].phi_0;
        run_cfgs[i].model.phi_c = cmd.scenarios[i].initial_phi_c;
        run_cfgs[i].seed = derive_seed(config.global.seed, i, 0x52);
        records[i] = qca_run(run_cfgs[i]);
    });

    for (std::size_t i = 0; i < cmd.scenarios.size(); ++i) {
        const QcaRunRecord& record = records[i];
        std::ostringstream csv;
        record.write_csv(csv);
        writer.add_file("qca_run_" + std::to_string(i) + ".csv", csv.str());
        writer.add_file("qca_run_" + std::to_string(i) + ".json",
                        record.summary_json() + "\n");

        roster << i << ',' << format_double(run_cfgs[i].model.phi_0) << ','
               << format_double(run_cfgs[i].model.phi_c) << ',' << (record.converged() ? 1 : 0)
               << ',' << (record.t_opt ? std::to_string(*record.t_opt) : std::string("nan"))
               << ','
               << (record.converged() ? format_double(record.post_convergence_mean_dphi)
                                      : std::string("nan"))
               << ',' << (record.failed_to_train ? 1 : 0) << '\n';
    }
    writer.add_file("qca_runs.csv", roster.str());
    writer.flush(out);
    return 0;
}

int cmd_precision(const ConfigFile& config, const Overrides& overrides, std::ostream& out) {
    PrecisionCmdConfig cmd = config.precision();
    if (overrides.samples) cmd.engine.samples_per_iteration = *overrides.samples;
    cmd.engine.validate();
    if (cmd.r_values.empty()) throw std::invalid_argument("precision: empty r list");

    QcaConfig base = cmd.engine;
    base.seed = config.global.seed;
    const std::vector<SqueezingStudyRow> rows = squeezing_study(
        base, cmd.r_values, cmd.n_runs, config.global.workers, cmd.randomize_init_sign);

    std::ostringstream csv;
    csv << "r,t_opt_median,mean_dphi_mrad,sigma_dphi_mrad\n";
    for (const SqueezingStudyRow& row : rows) {
        csv << format_double(row.r) << ',' << format_double(row.t_opt_median) << ','
            << format_double(1e3 * row.precision.mean_of_means) << ','
            << format_double(1e3 * row.precision.std_of_means) << '\n';
    }

    Json ratios;
    ratios["speedup_t_opt"] = rows.front().t_opt_median / rows.back().t_opt_median;
    ratios["precision_ratio"] =
        rows.front().precision.std_of_means / rows.back().precision.std_of_means;
    Json excluded = Json::array();
    for (const SqueezingStudyRow& row : rows)
        excluded.push_back(Json{{"r", row.r}, {"excluded_runs", row.precision.n_excluded}});
    ratios["excluded"] = excluded;

    StudyWriter writer(config.global.out_dir, "precision", config);
    writer.add_file("precision.csv", csv.str());
    writer.add_file("precision_summary.json", ratios.dump(2) + "\n");
    writer.flush(out);
    return 0;
}

int cmd_fit(const ConfigFile& config, const Overrides& overrides, std::ostream& out) {
    if (!overrides.input)
        throw std::invalid_argument("fit: --input <landscape.csv> is required");
    FitCmdConfig cmd = config.fit();

    std::ifstream in(*overrides.input);
    if (!in) throw std::invalid_argument("fit: cannot open " + *overrides.input);
    const LandscapeTable data = LandscapeTable::read_csv(in);

    const FitResult result = fit_cost_model(data, cmd.options);

    StudyWriter writer(config.global.out_dir, "fit", config);
    writer.add_file("fit.json", result.to_json() + "\n");

    // Fitted curve on the data grid, for overlay plots.
    {
        const double min_var = cmd.options.min_variance
                                   ? *cmd.options.min_variance
                                   : estimate_min_variance(data, cmd.options.fwhm_fraction);
        SeedNoiseCostModel model(cmd.options.epsilon, min_var, cmd.options.bounds);
        std::ostringstream curve;
        curve << "delta_phi_rad,cost_fit\n";
        for (const LandscapeRow& row : data.rows)
            curve << format_double(row.delta_phi) << ','
                  << format_double(model.eval(row.delta_phi, result.params)) << '\n';
        writer.add_file("fit_curve.csv", curve.str());

        if (cmd.compare_noisy_readout) {
            NoisyReadoutCostModel alt(cmd.options.epsilon, min_var, cmd.options.bounds);
            const FitResult alt_fit =
                fit_parametric(alt, data, cmd.options.multi_starts, cmd.options.weighted);
            const std::vector<FitResult> fits{result, alt_fit};
            const ModelComparison cmp = compare_models(fits);
            Json j;
            j["models"] = {fits[0].model_name, fits[1].model_name};
            j["aic"] = {fits[0].aic, fits[1].aic};
            j["delta_aic"] = cmp.delta_aic;
            j["selected"] = fits[cmp.best].model_name;
            j["significantly_less_supported"] = cmp.significantly_less_supported;
            writer.add_file("model_comparison.json", j.dump(2) + "\n");
        }
    }
    writer.flush(out);
    out << "fit: epsilon_prime=" << result.epsilon_prime << " n_in=" << result.n_in
        << " r=" << result.r << " rss=" << result.rss << '\n';
    return 0;
}

int cmd_ingest(const ConfigFile& config, const Overrides& overrides, std::ostream& out) {
    if (!overrides.trace || !overrides.sidecar)
        throw std::invalid_argument("ingest: --trace <file> and --sidecar <json> are required");
    if (!std::filesystem::exists(*overrides.trace))
        throw std::invalid_argument("ingest: trace file not found: " + *overrides.trace);
    if (!std::filesystem::exists(*overrides.sidecar))
        throw std::invalid_argument("ingest: calibration sidecar not found: " +
                                    *overrides.sidecar);
    const IngestCmdConfig cmd = config.ingest();

    const HomodyneTrace trace = read_trace(*overrides.trace, *overrides.sidecar);
    const CostEstimate hist = process_trace_histogram(trace, cmd.histogram_bins);
    const CostEstimate direct = process_trace_direct(trace);

    std::ostringstream csv;
    csv << "method,n_samples,variance,cost,stderr\n";
    for (const CostEstimate* est : {&hist, &direct}) {
        csv << to_string(est->method) << ',' << est->n_samples << ','
            << format_double(est->variance_x_minus) << ',' << format_double(est->cost) << ','
            << format_double(est->std_error) << '\n';
    }

    const double diff = hist.cost - direct.cost;
    const double combined =
        std::sqrt(hist.std_error * hist.std_error + direct.std_error * direct.std_error);
    Json agreement{{"cost_difference", diff},
                   {"combined_std_error", combined},
                   {"within_3_combined_se", std::abs(diff) <= 3.0 * combined}};

    StudyWriter writer(config.global.out_dir, "ingest", config);
    writer.add_file("cost_estimates.csv", csv.str());
    writer.add_file("agreement.json", agreement.dump(2) + "\n");
    writer.flush(out);
    return 0;
}

int cmd_verify(const ConfigFile& config, std::ostream& out) {
    const std::vector<VerifyCheck> checks = run_verify_suite(config.verify());

    bool all_pass = true;
    Json report = Json::array();
    for (const VerifyCheck& check : checks) {
        all_pass = all_pass && check.pass;
        out << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << " (measured "
            << std::setprecision(6) << std::scientific << check.measured << ", tolerance "
            << check.tolerance << std::defaultfloat << ")";
        if (!check.detail.empty()) out << "  " << check.detail;
        out << '\n';
        report.push_back(Json{{"name", check.name},
                              {"pass", check.pass},
                              {"measured", check.measured},
                              {"tolerance", check.tolerance}});
    }

    StudyWriter writer(config.global.out_dir, "verify", config);
    writer.add_file("verify_report.json", report.dump(2) + "\n");
    writer.flush(out);
    out << (all_pass ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    return all_pass ? 0 : 4;
}

}  // namespace

int run_command(const std::string& verb, const std::optional<std::string>& config_path,
                const Overrides& overrides, std::ostream& out, std::ostream& err) {
    try {
        const ConfigFile config = load_config(config_path, overrides);
        if (verb == "landscape") return cmd_landscape(config, overrides, out);
        if (verb == "qca") return cmd_qca(config, overrides, out);
        if (verb == "precision") return cmd_precision(config, overrides, out);
        if (verb == "fit") return cmd_fit(config, overrides, out);
        if (verb == "ingest") return cmd_ingest(config, overrides, out);
        if (verb == "verify") return cmd_verify(config, out);
        err << "unknown command: " << verb << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace cvqc::cli
