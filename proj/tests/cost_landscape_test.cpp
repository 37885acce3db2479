#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cvqc/cost_landscape.hpp"
#include "cvqc/gaussian_model.hpp"
#include "cvqc/stats.hpp"
#include "cvqc/util.hpp"
#include "test_util.hpp"

using namespace cvqc;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("cost anchors") {
    CHECK(cost(ModelParams::vacuum()) == doctest::Approx(-1.0 / std::sqrt(pi)).epsilon(1e-12));
    CHECK(cost(ModelParams::ideal(0.74)) ==
          doctest::Approx(-std::exp(0.74) / std::sqrt(pi)).epsilon(1e-12));
    const double n = std::sinh(0.74) * std::sinh(0.74);
    CHECK(cost(ModelParams::ideal(0.74, pi / 2.0)) ==
          doctest::Approx(-1.0 / std::sqrt(pi * (1.0 + 2.0 * n))).epsilon(1e-12));
    CHECK(cost(ModelParams::ideal(0.74, pi / 2.0)) == doctest::Approx(-0.3712).epsilon(2e-4));
}

TEST_CASE("cost equals minus the marginal peak and is minimized at zero offset") {
    Rng rng(11);
    for (int i = 0; i < 40; ++i) {
        ModelParams p = test::random_params(rng);
        if (p.r < 0.05) p.r = 0.05;
        CHECK(cost(p) == doctest::Approx(-marginal_diff_density(0.0, p)).epsilon(1e-14));
        CHECK(cost(p) < 0.0);
        const double at_zero = cost(p.with_delta_phi(0.0));
        if (std::abs(p.delta_phi()) > 1e-3) CHECK(at_zero < cost(p));
    }
}

TEST_CASE("cost is even in delta_phi") {
    Rng rng(12);
    for (int i = 0; i < 40; ++i) {
        ModelParams p = test::random_params(rng);
        const double dphi = p.delta_phi();
        CHECK(cost(p.with_delta_phi(dphi)) ==
              doctest::Approx(cost(p.with_delta_phi(-dphi))).epsilon(1e-14));
    }
}

TEST_CASE("cost estimate from samples agrees with the closed form") {
    // Monte Carlo cross-check of the analytic anchor values.
    for (double dphi : {0.0, pi / 2.0}) {
        const ModelParams p = ModelParams::ideal(0.74, dphi);
        const CostEstimate est = cost_evaluator(p, 10000000, NoiseConfig{}, 777);
        CHECK(std::abs(est.cost - cost(p)) < 5.0 * est.std_error);
    }
}

TEST_CASE("normalized cost is -1 at the minimum and needs r > 0") {
    CHECK(normalized_cost(ModelParams::ideal(0.35)) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(normalized_cost(ModelParams::vacuum()), std::invalid_argument);
}

TEST_CASE("normalized cost curvature matches the quadratic coefficient") {
    const double h = 1e-3;
    for (double n : {0.03, 0.1, 0.5, 1.0}) {
        const double r = std::asinh(std::sqrt(n));
        const double up = normalized_cost(ModelParams::ideal(r, h));
        const double down = normalized_cost(ModelParams::ideal(r, -h));
        const double second = (up + down - 2.0 * normalized_cost(ModelParams::ideal(r, 0.0))) /
                              (h * h);
        CHECK(second == doctest::Approx(quadratic_coefficient_f(n)).epsilon(1e-4));
    }
}

TEST_CASE("quadratic coefficient values and asymptotics") {
    CHECK(quadratic_coefficient_f(0.0) == 0.0);
    CHECK(quadratic_coefficient_f(1.0) ==
          doctest::Approx(4.0 + 3.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(quadratic_coefficient_f(-0.1), std::invalid_argument);
    double prev = 0.0;
    for (double n = 0.1; n <= 10.0; n += 0.1) {
        const double f = quadratic_coefficient_f(n);
        CHECK(f > prev);
        prev = f;
    }
    // f(N) approaches 4 N^2, i.e. f / (2 N^2) -> 2.
    CHECK(quadratic_coefficient_f(100.0) / (2.0 * 100.0 * 100.0) ==
          doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("seeded cost limits") {
    CHECK(seeded_cost(SeededParams{0.6, 0.0, 0.4, 0.4}) == doctest::Approx(-1.0));
    CHECK(seeded_cost(SeededParams{0.0, 0.3, 0.0, 0.0}) == doctest::Approx(-1.0));

    // alpha -> 0: quadratic coefficient 2 cosh^2 r sinh^2 r = 2 N (N+1).
    const double r = 0.5;
    const double h = 5e-3;
    const double c2 = (seeded_cost(SeededParams{r, 1e-5, 0.0, h}) + 1.0) / (h * h);
    const double sc = std::sinh(r) * std::cosh(r);
    CHECK(c2 == doctest::Approx(2.0 * sc * sc).epsilon(1e-3));

    // r = 0: quartic with coefficient N/2 = alpha^2 / 2.
    for (double alpha : {0.1, 0.5}) {
        const double c4 = (seeded_cost(SeededParams{0.0, alpha, 0.0, h}) + 1.0) / (h * h * h * h);
        CHECK(c4 == doctest::Approx(0.5 * alpha * alpha).epsilon(1e-3));
    }
}

TEST_CASE("seeded energy bookkeeping") {
    const SeededParams p{0.3, 0.4, 0.0, 0.0};
    CHECK(p.mean_photons() ==
          doctest::Approx(0.16 * std::exp(0.6) + std::sinh(0.3) * std::sinh(0.3)));
}

TEST_CASE("landscape sweep validates its grid") {
    const ModelParams base = ModelParams::ideal(0.5);
    CHECK_THROWS_AS(landscape_sweep(base, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(landscape_sweep(base, std::vector<double>{0.2, 0.1}),
                    std::invalid_argument);
}

TEST_CASE("landscape is symmetric on a symmetric grid") {
    const auto grid = linspace(-2.0, 2.0, 41);
    const LandscapeTable table = landscape_sweep(ModelParams::ideal(0.6), grid);
    const std::size_t n = table.rows.size();
    for (std::size_t i = 0; i < n / 2; ++i)
        CHECK(table.rows[i].cost == doctest::Approx(table.rows[n - 1 - i].cost).epsilon(1e-13));
}

TEST_CASE("landscape flatness scales with squeezing") {
    const auto grid = linspace(-pi, pi, 201);
    auto relative_spread = [&](double r) {
        const LandscapeTable t = landscape_sweep(ModelParams::ideal(r), grid);
        double lo = t.rows[0].cost, hi = t.rows[0].cost;
        for (const auto& row : t.rows) {
            lo = std::min(lo, row.cost);
            hi = std::max(hi, row.cost);
        }
        return (hi - lo) / std::abs(lo);
    };
    // Near-zero squeezing leaves the landscape essentially flat; the spread
    // grows monotonically with r.
    CHECK(relative_spread(5e-4) < 1e-3);
    const double s_small = relative_spread(0.01);
    CHECK(s_small < 0.03);
    CHECK(s_small < 0.05 * relative_spread(0.74));
    double prev = 0.0;
    for (double r : {0.01, 0.4, 1.5, 2.5}) {
        const double s = relative_spread(r);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("plateau flattens exponentially away from the gorge") {
    double prev = 1.0;
    for (double r : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        const double gap = std::abs(cost(ModelParams::ideal(r, pi)) -
                                    cost(ModelParams::ideal(r, pi / 2.0)));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("dip width narrows with squeezing") {
    const auto grid = linspace(-pi, pi, 801);
    double prev = 10.0;
    for (double r : {0.18, 0.35, 0.74}) {
        const LandscapeTable t = landscape_sweep(ModelParams::ideal(r), grid);
        std::vector<double> dphi, c;
        for (const auto& row : t.rows) {
            dphi.push_back(row.delta_phi);
            c.push_back(row.cost);
        }
        const double width = dip_fwhm(dphi, c);
        CHECK(width < prev);
        prev = width;
    }
}

TEST_CASE("landscape csv round trip") {
    const auto grid = linspace(-1.0, 1.0, 11);
    const LandscapeTable table = landscape_sweep(ModelParams::ideal(0.35), grid);
    std::stringstream buffer;
    table.write_csv(buffer);
    const LandscapeTable back = LandscapeTable::read_csv(buffer);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(back.rows[i].delta_phi == table.rows[i].delta_phi);
        CHECK(back.rows[i].cost == table.rows[i].cost);
        CHECK(back.rows[i].variance == table.rows[i].variance);
    }
}

TEST_CASE("monte carlo sweep rows carry uncertainties and are reproducible") {
    const auto grid = linspace(-0.5, 0.5, 5);
    const LandscapeTable a =
        landscape_sweep_mc(ModelParams::ideal(0.35), grid, 20000, NoiseConfig{}, 99);
    const LandscapeTable b =
        landscape_sweep_mc(ModelParams::ideal(0.35), grid, 20000, NoiseConfig{}, 99);
    REQUIRE(a.rows.size() == 5);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        REQUIRE(a.rows[i].cost_stderr.has_value());
        CHECK(a.rows[i].cost == b.rows[i].cost);
        const ModelParams p = ModelParams::ideal(0.35, a.rows[i].delta_phi);
        CHECK(std::abs(a.rows[i].cost - cost(p)) < 5.0 * *a.rows[i].cost_stderr);
    }
}
