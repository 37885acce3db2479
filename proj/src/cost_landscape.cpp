#include "cvqc/cost_landscape.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cvqc/gaussian_model.hpp"
#include "cvqc/util.hpp"

namespace cvqc {

double cost(const ModelParams& params) {
    return -marginal_diff_density(0.0, params);
}

double normalized_cost(const ModelParams& params) {
    params.validate();
    if (!(params.r > 0.0))
        throw std::invalid_argument("normalized_cost: requires r > 0");
    const double anchor = cost(params.with_delta_phi(0.0));
    return cost(params) / std::abs(anchor);
}

double quadratic_coefficient_f(double n_photons) {
    if (!(n_photons >= 0.0) || !std::isfinite(n_photons))
        throw std::invalid_argument("quadratic_coefficient_f: photon number must be >= 0");
    const double root = std::sqrt(n_photons * (n_photons + 1.0));
    return root * (2.0 * root + 2.0 * n_photons + 1.0);
}

double SeededParams::mean_photons() const {
    return alpha * alpha * std::exp(2.0 * r) + std::sinh(r) * std::sinh(r);
}

void SeededParams::validate() const {
    if (!(std::isfinite(r) && r >= 0.0))
        throw std::invalid_argument("SeededParams: r must be finite and >= 0");
    if (!std::isfinite(alpha)) throw std::invalid_argument("SeededParams: alpha must be finite");
    if (!std::isfinite(phi_0) || !std::isfinite(phi_c))
        throw std::invalid_argument("SeededParams: phases must be finite");
}

namespace {

// Joint-density value (up to the constant 1/pi, which cancels in the
// normalization) at the most likely quadrature point of the seeded state.
double seeded_peak(double r, double alpha, double phi_0, double phi_c) {
    const double c = std::cos(phi_c - phi_0);
    const double ch = std::cosh(2.0 * r);
    const double sh = std::sinh(2.0 * r);
    const double det = ch * ch - sh * sh * c * c;

    const double scale = std::sqrt(2.0) * std::exp(r) * alpha;
    const double d1 = scale * (1.0 - std::cos(phi_c));
    const double d2 = scale * (1.0 - std::cos(phi_0));
    const double quad = ch * (d1 * d1 + d2 * d2) - 2.0 * sh * c * d1 * d2;
    return std::exp(-quad / det) / std::sqrt(det);
}

}  // namespace

double seeded_cost(const SeededParams& params) {
    params.validate();
    const double anchor = seeded_peak(params.r, params.alpha, params.phi_0, params.phi_0);
    return -seeded_peak(params.r, params.alpha, params.phi_0, params.phi_c) / anchor;
}

void LandscapeTable::write_csv(std::ostream& out) const {
    const bool with_stderr =
        !rows.empty() && std::all_of(rows.begin(), rows.end(),
                                     [](const LandscapeRow& r) { return r.cost_stderr.has_value(); });
    out << "delta_phi_rad,cost,variance";
    if (with_stderr) out << ",cost_stderr";
    out << '\n';
    for (const LandscapeRow& row : rows) {
        out << format_double(row.delta_phi) << ',' << format_double(row.cost) << ','
            << format_double(row.variance);
        if (with_stderr) out << ',' << format_double(*row.cost_stderr);
        out << '\n';
    }
}

LandscapeTable LandscapeTable::read_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw std::invalid_argument("landscape csv: empty input");

    std::vector<std::string> columns;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) columns.push_back(col);
    }
    auto column_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int i_phi = column_index("delta_phi_rad");
    const int i_cost = column_index("cost");
    const int i_var = column_index("variance");
    const int i_err = column_index("cost_stderr");
    if (i_phi < 0 || i_cost < 0)
        throw std::invalid_argument("landscape csv: need delta_phi_rad and cost columns");

    LandscapeTable table;
    std::string line;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);

        auto get = [&](int idx) -> double {
            if (idx < 0 || static_cast<std::size_t>(idx) >= fields.size())
                throw std::invalid_argument("landscape csv: missing field at row " +
                                         std::to_string(row_number));
            try {
                return std::stod(fields[static_cast<std::size_t>(idx)]);
            } catch (const std::exception&) {
                throw std::invalid_argument("landscape csv: bad number at row " +
                                         std::to_string(row_number));
            }
        };

        LandscapeRow row;
        row.delta_phi = get(i_phi);
        row.cost = get(i_cost);
        // Variance is derivable from the cost when the column is absent.
        row.variance = i_var >= 0 ? get(i_var) : 1.0 / (2.0 * pi * row.cost * row.cost);
        if (i_err >= 0 && static_cast<std::size_t>(i_err) < fields.size())
            row.cost_stderr = get(i_err);
        table.rows.push_back(row);
    }
    return table;
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("landscape_sweep: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("landscape_sweep: grid must be strictly increasing");
}

}  // namespace

LandscapeTable landscape_sweep(const ModelParams& base, std::span<const double> delta_phi_grid) {
    base.validate();
    check_grid(delta_phi_grid);
    LandscapeTable table;
    table.rows.reserve(delta_phi_grid.size());
    for (double dphi : delta_phi_grid) {
        const ModelParams p = base.with_delta_phi(dphi);
        table.rows.push_back(LandscapeRow{dphi, cost(p), diff_quadrature_variance(p), {}});
    }
    return table;
}

LandscapeTable landscape_sweep_mc(const ModelParams& base, std::span<const double> delta_phi_grid,
                                  std::size_t n_samples, const NoiseConfig& noise,
                                  std::uint64_t seed) {
    base.validate();
    check_grid(delta_phi_grid);
    LandscapeTable table;
    table.rows.resize(delta_phi_grid.size());
    // Grid points carry independent seed streams, so the result does not
    // depend on the worker count.
    parallel_for(delta_phi_grid.size(), 0, [&](std::size_t i) {
        const ModelParams p = base.with_delta_phi(delta_phi_grid[i]);
        const CostEstimate est = cost_evaluator(p, n_samples, noise, derive_seed(seed, i));
        table.rows[i] =
            LandscapeRow{delta_phi_grid[i], est.cost, est.variance_x_minus, est.std_error};
    });
    return table;
}

double dip_fwhm(std::span<const double> delta_phi, std::span<const double> cost_values) {
    if (delta_phi.size() != cost_values.size() || delta_phi.size() < 3)
        throw std::invalid_argument("dip_fwhm: need matching arrays with >= 3 points");

    const auto min_it = std::min_element(cost_values.begin(), cost_values.end());
    const std::size_t k = static_cast<std::size_t>(min_it - cost_values.begin());
    if (k == 0 || k + 1 == cost_values.size())
        throw std::runtime_error("dip_fwhm: minimum not bracketed by the table");

    const double c_min = *min_it;
    const double c_max = *std::max_element(cost_values.begin(), cost_values.end());
    if (!(c_max > c_min)) throw std::runtime_error("dip_fwhm: profile is flat");
    const double half = 0.5 * (c_max + c_min);

    auto crossing = [&](bool leftward) -> double {
        std::size_t i = k;
        while (true) {
            const std::size_t next = leftward ? i - 1 : i + 1;
            if (cost_values[next] >= half) {
                const double t = (half - cost_values[i]) / (cost_values[next] - cost_values[i]);
                return delta_phi[i] + t * (delta_phi[next] - delta_phi[i]);
            }
            i = next;
            if ((leftward && i == 0) || (!leftward && i + 1 == cost_values.size()))
                throw std::runtime_error("dip_fwhm: half level not reached inside the table");
        }
    };

    const double left = crossing(true);
    const double right = crossing(false);
    return right - left;
}

}  // namespace cvqc
