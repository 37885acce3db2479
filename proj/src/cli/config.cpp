#include "cvqc/cli/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvqc::cli {

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& message) {
    throw std::invalid_argument("config: " + context + ": " + message);
}

const Json* find(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const Json& obj, const char* key, double fallback, const std::string& context) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail(context, std::string(key) + " must be a number");
    return v->get<double>();
}

std::uint64_t unsigned_int(const Json& obj, const char* key, std::uint64_t fallback,
                           const std::string& context) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) fail(context, std::string(key) + " must be a non-negative integer");
    return v->get<std::uint64_t>();
}

bool boolean(const Json& obj, const char* key, bool fallback, const std::string& context) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(context, std::string(key) + " must be a boolean");
    return v->get<bool>();
}

std::vector<double> number_list(const Json& obj, const char* key,
                                std::vector<double> fallback, const std::string& context) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) fail(context, std::string(key) + " must be a non-empty array");
    std::vector<double> out;
    for (const Json& item : *v) {
        if (!item.is_number()) fail(context, std::string(key) + " entries must be numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

NoiseConfig parse_noise(const Json& obj, const std::string& context) {
    NoiseConfig noise;
    const Json* v = find(obj, "noise");
    if (!v) return noise;
    if (!v->is_object()) fail(context, "noise must be an object");
    require_known_keys(*v, {"gain_m", "mean_offset", "sigma_e_sq", "pipeline", "bins"},
                       context + ".noise");
    noise.gain_m = number(*v, "gain_m", noise.gain_m, context);
    noise.mean_offset = number(*v, "mean_offset", noise.mean_offset, context);
    noise.sigma_e_sq = number(*v, "sigma_e_sq", noise.sigma_e_sq, context);
    noise.histogram_bins = static_cast<int>(unsigned_int(*v, "bins", 128, context));
    if (const Json* p = find(*v, "pipeline")) {
        if (!p->is_string()) fail(context, "noise.pipeline must be a string");
        const std::string name = p->get<std::string>();
        if (name == "direct-variance")
            noise.pipeline = PipelineMethod::direct_variance;
        else if (name == "histogram-fit")
            noise.pipeline = PipelineMethod::histogram_fit;
        else
            fail(context, "noise.pipeline must be direct-variance or histogram-fit");
    }
    return noise;
}

const std::vector<std::string> kEngineKeys = {
    "r",        "epsilon",       "epsilon_prime",         "n_b_prime",
    "phi_0",    "initial_phi_c", "initial_delta_phi",     "eta",
    "eta_post_factor", "max_iterations", "fd_step",       "samples_per_iteration",
    "convergence_sigma_multiple", "convergence_sigma",    "noise"};

QcaConfig parse_engine(const Json& obj, const std::string& context) {
    QcaConfig cfg;
    cfg.model.r = number(obj, "r", 0.74, context);
    cfg.model.epsilon = number(obj, "epsilon", 1.0, context);
    cfg.model.epsilon_prime = number(obj, "epsilon_prime", 1.0, context);
    cfg.model.n_b_prime = number(obj, "n_b_prime", 0.0, context);
    cfg.model.phi_0 = number(obj, "phi_0", 0.0, context);
    if (find(obj, "initial_phi_c") && find(obj, "initial_delta_phi"))
        fail(context, "give either initial_phi_c or initial_delta_phi, not both");
    if (const Json* v = find(obj, "initial_phi_c"))
        cfg.model.phi_c = v->get<double>();
    else
        cfg.model.phi_c = cfg.model.phi_0 + number(obj, "initial_delta_phi", 3.0, context);
    cfg.eta_initial = number(obj, "eta", 0.35, context);
    cfg.eta_post_factor = number(obj, "eta_post_factor", 10.0, context);
    cfg.max_iterations = unsigned_int(obj, "max_iterations", 550, context);
    cfg.fd_step = number(obj, "fd_step", 0.05, context);
    cfg.samples_per_iteration = unsigned_int(obj, "samples_per_iteration", 100000, context);
    cfg.convergence_sigma_multiple = number(obj, "convergence_sigma_multiple", 1.0, context);
    if (find(obj, "convergence_sigma"))
        cfg.convergence_sigma_override = number(obj, "convergence_sigma", 0.0, context);
    cfg.noise = parse_noise(obj, context);
    return cfg;
}

}  // namespace

void require_known_keys(const Json& obj, const std::vector<std::string>& allowed,
                        const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const std::string& key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) fail(context, "unknown key '" + it.key() + "'");
    }
}

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    try {
        cfg.raw = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!cfg.raw.is_object()) throw std::invalid_argument("config: top level must be an object");
    require_known_keys(cfg.raw,
                       {"seed", "out_dir", "workers", "landscape", "qca", "precision", "fit",
                        "ingest", "verify"},
                       "top level");
    cfg.global.seed = unsigned_int(cfg.raw, "seed", 1, "top level");
    cfg.global.workers =
        static_cast<unsigned>(unsigned_int(cfg.raw, "workers", 0, "top level"));
    if (const Json* v = find(cfg.raw, "out_dir")) {
        if (!v->is_string()) throw std::invalid_argument("config: out_dir must be a string");
        cfg.global.out_dir = v->get<std::string>();
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

ConfigFile ConfigFile::defaults() { return parse("{}"); }

LandscapeCmdConfig ConfigFile::landscape() const {
    LandscapeCmdConfig cfg;
    const Json* section = find(raw, "landscape");
    if (!section) return cfg;
    const std::string ctx = "landscape";
    if (!section->is_object()) fail(ctx, "must be an object");
    require_known_keys(*section,
                       {"r_values", "epsilon", "epsilon_prime", "n_b_prime", "grid",
                        "monte_carlo", "samples", "noise"},
                       ctx);
    cfg.r_values = number_list(*section, "r_values", cfg.r_values, ctx);
    cfg.base.epsilon = number(*section, "epsilon", 1.0, ctx);
    cfg.base.epsilon_prime = number(*section, "epsilon_prime", 1.0, ctx);
    cfg.base.n_b_prime = number(*section, "n_b_prime", 0.0, ctx);
    if (const Json* grid = find(*section, "grid")) {
        if (!grid->is_object()) fail(ctx, "grid must be an object");
        require_known_keys(*grid, {"start", "stop", "points"}, ctx + ".grid");
        cfg.grid_start = number(*grid, "start", cfg.grid_start, ctx);
        cfg.grid_stop = number(*grid, "stop", cfg.grid_stop, ctx);
        cfg.grid_points = static_cast<int>(unsigned_int(*grid, "points", 201, ctx));
    }
    cfg.monte_carlo = boolean(*section, "monte_carlo", false, ctx);
    cfg.samples = unsigned_int(*section, "samples", cfg.samples, ctx);
    cfg.noise = parse_noise(*section, ctx);

    if (cfg.grid_points < 2) fail(ctx, "grid.points must be >= 2");
    if (!(cfg.grid_stop > cfg.grid_start)) fail(ctx, "grid.stop must exceed grid.start");
    for (double r : cfg.r_values)
        if (!(r >= 0.0)) fail(ctx, "r_values must be >= 0");
    return cfg;
}

QcaCmdConfig ConfigFile::qca() const {
    QcaCmdConfig cfg;
    const Json* section = find(raw, "qca");
    const std::string ctx = "qca";
    if (!section) {
        cfg.engine = parse_engine(Json::object(), ctx);
        cfg.scenarios.push_back(QcaScenario{cfg.engine.model.phi_0, cfg.engine.model.phi_c});
        return cfg;
    }
    if (!section->is_object()) fail(ctx, "must be an object");
    std::vector<std::string> allowed = kEngineKeys;
    allowed.push_back("scenarios");
    require_known_keys(*section, allowed, ctx);
    cfg.engine = parse_engine(*section, ctx);

    if (const Json* scen = find(*section, "scenarios")) {
        if (!scen->is_array() || scen->empty()) fail(ctx, "scenarios must be a non-empty array");
        for (const Json& s : *scen) {
            if (!s.is_object()) fail(ctx, "scenario entries must be objects");
            require_known_keys(s, {"phi_0", "initial_phi_c", "initial_delta_phi"},
                               ctx + ".scenarios");
            QcaScenario scenario;
            scenario.phi_0 = number(s, "phi_0", cfg.engine.model.phi_0, ctx);
            if (find(s, "initial_phi_c") && find(s, "initial_delta_phi"))
                fail(ctx, "scenario: give either initial_phi_c or initial_delta_phi");
            if (const Json* v = find(s, "initial_phi_c"))
                scenario.initial_phi_c = v->get<double>();
            else
                scenario.initial_phi_c =
                    scenario.phi_0 + number(s, "initial_delta_phi", 3.0, ctx);
            cfg.scenarios.push_back(scenario);
        }
    } else {
        cfg.scenarios.push_back(QcaScenario{cfg.engine.model.phi_0, cfg.engine.model.phi_c});
    }
    return cfg;
}

PrecisionCmdConfig ConfigFile::precision() const {
    PrecisionCmdConfig cfg;
    const Json* section = find(raw, "precision");
    const std::string ctx = "precision";
    if (!section) {
        cfg.engine = parse_engine(Json::object(), ctx);
        return cfg;
    }
    if (!section->is_object()) fail(ctx, "must be an object");
    std::vector<std::string> allowed = kEngineKeys;
    allowed.push_back("r_values");
    allowed.push_back("n_runs");
    allowed.push_back("randomize_init_sign");
    require_known_keys(*section, allowed, ctx);
    cfg.engine = parse_engine(*section, ctx);
    cfg.r_values = number_list(*section, "r_values", cfg.r_values, ctx);
    cfg.n_runs = unsigned_int(*section, "n_runs", cfg.n_runs, ctx);
    cfg.randomize_init_sign = boolean(*section, "randomize_init_sign", true, ctx);
    if (cfg.n_runs < 2) fail(ctx, "n_runs must be >= 2");
    for (std::size_t i = 1; i < cfg.r_values.size(); ++i)
        if (!(cfg.r_values[i] > cfg.r_values[i - 1]))
            fail(ctx, "r_values must be strictly increasing");
    return cfg;
}

FitCmdConfig ConfigFile::fit() const {
    FitCmdConfig cfg;
    const Json* section = find(raw, "fit");
    if (!section) return cfg;
    const std::string ctx = "fit";
    if (!section->is_object()) fail(ctx, "must be an object");
    require_known_keys(*section,
                       {"epsilon", "multi_starts", "weighted", "fwhm_fraction", "min_variance",
                        "bounds", "compare_noisy_readout"},
                       ctx);
    cfg.options.epsilon = number(*section, "epsilon", cfg.options.epsilon, ctx);
    cfg.options.multi_starts =
        static_cast<int>(unsigned_int(*section, "multi_starts", 16, ctx));
    cfg.options.weighted = boolean(*section, "weighted", false, ctx);
    cfg.options.fwhm_fraction = number(*section, "fwhm_fraction", 0.12, ctx);
    if (find(*section, "min_variance"))
        cfg.options.min_variance = number(*section, "min_variance", 0.0, ctx);
    if (const Json* bounds = find(*section, "bounds")) {
        if (!bounds->is_object()) fail(ctx, "bounds must be an object");
        require_known_keys(*bounds, {"epsilon_prime", "n_in"}, ctx + ".bounds");
        auto parse_range = [&](const char* key, double& lo, double& hi) {
            if (const Json* v = find(*bounds, key)) {
                if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
                    !(*v)[1].is_number())
                    fail(ctx, std::string("bounds.") + key + " must be [lo, hi]");
                lo = (*v)[0].get<double>();
                hi = (*v)[1].get<double>();
                if (!(hi > lo)) fail(ctx, std::string("bounds.") + key + ": hi must exceed lo");
            }
        };
        parse_range("epsilon_prime", cfg.options.bounds.epsilon_prime_lo,
                    cfg.options.bounds.epsilon_prime_hi);
        parse_range("n_in", cfg.options.bounds.n_in_lo, cfg.options.bounds.n_in_hi);
    }
    cfg.compare_noisy_readout = boolean(*section, "compare_noisy_readout", false, ctx);
    return cfg;
}

IngestCmdConfig ConfigFile::ingest() const {
    IngestCmdConfig cfg;
    const Json* section = find(raw, "ingest");
    if (!section) return cfg;
    const std::string ctx = "ingest";
    if (!section->is_object()) fail(ctx, "must be an object");
    require_known_keys(*section, {"bins"}, ctx);
    cfg.histogram_bins = static_cast<int>(unsigned_int(*section, "bins", 128, ctx));
    return cfg;
}

VerifyOptions ConfigFile::verify() const {
    VerifyOptions options;
    const Json* section = find(raw, "verify");
    if (!section) return options;
    const std::string ctx = "verify";
    if (!section->is_object()) fail(ctx, "must be an object");
    require_known_keys(*section, {"seed", "oracle_draws", "round_trip_draws"}, ctx);
    options.seed = unsigned_int(*section, "seed", options.seed, ctx);
    options.oracle_draws =
        static_cast<int>(unsigned_int(*section, "oracle_draws", 50, ctx));
    options.round_trip_draws =
        static_cast<int>(unsigned_int(*section, "round_trip_draws", 1000, ctx));
    return options;
}

}  // namespace cvqc::cli
