#include "cvqc/verify.hpp"

#include <cmath>
#include <sstream>

#include "cvqc/cost_landscape.hpp"
#include "cvqc/gaussian_model.hpp"
#include "cvqc/param_estimation.hpp"
#include "cvqc/qca.hpp"
#include "cvqc/quadrature.hpp"
#include "cvqc/rng.hpp"
#include "cvqc/util.hpp"
#include "cvqc/wigner_oracle.hpp"

namespace cvqc {

namespace {

ModelParams random_draw(Rng& rng) {
    ModelParams p;
    p.r = rng.uniform(0.0, 1.5);
    p.epsilon = rng.uniform(0.3, 1.0);
    p.epsilon_prime = rng.uniform(0.3, 1.0);
    p.n_b_prime = rng.uniform(0.0, 2.0);
    p.phi_0 = 0.0;
    p.phi_c = rng.uniform(-pi, pi);
    return p;
}

double analytic_cost_derivative(const ModelParams& params) {
    const QuadraticForm2 form = homodyne_quadratic_form(params);
    const double alpha = form.sum_coefficient();
    const double kappa = std::sqrt(params.epsilon * params.epsilon_prime) *
                         (1.0 + params.n_b + params.n_b_prime) *
                         std::sqrt(params.mean_photons() * (params.mean_photons() + 1.0));
    const double dalpha = 4.0 * kappa * std::sin(params.delta_phi());
    return 0.5 * std::sqrt(2.0 / pi) * std::pow(alpha, -1.5) * dalpha;
}

// Least-squares (c2, c4) of y = c2 x^2 + c4 x^4 on a symmetric grid.
void fit_even_quartic(std::span<const double> xs, std::span<const double> ys, double& c2,
                      double& c4) {
    double s4 = 0.0, s6 = 0.0, s8 = 0.0, y2 = 0.0, y4 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x2 = xs[i] * xs[i];
        s4 += x2 * x2;
        s6 += x2 * x2 * x2;
        s8 += x2 * x2 * x2 * x2;
        y2 += ys[i] * x2;
        y4 += ys[i] * x2 * x2;
    }
    const double det = s4 * s8 - s6 * s6;
    c2 = (y2 * s8 - y4 * s6) / det;
    c4 = (y4 * s4 - y2 * s6) / det;
}

}  // namespace

VerifyCheck oracle_equivalence_check(const MarginalFn& marginal, std::uint64_t seed, int draws,
                                     double tolerance) {
    VerifyCheck check;
    check.name = "marginal-vs-wigner-oracle";
    check.tolerance = tolerance;

    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
        const ModelParams p = random_draw(rng);
        const double sd = std::sqrt(diff_quadrature_variance(p));
        const double x = rng.uniform(-3.0 * sd, 3.0 * sd);
        const double oracle = wigner_marginal_oracle(x, p);
        const double closed = marginal(x, p);
        worst = std::max(worst, std::abs(oracle - closed));
    }
    check.measured = worst;
    check.pass = worst <= tolerance;
    return check;
}

std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& options) {
    std::vector<VerifyCheck> checks;

    checks.push_back(oracle_equivalence_check(
        [](double x, const ModelParams& p) { return marginal_diff_density(x, p); }, options.seed,
        options.oracle_draws));

    {
        VerifyCheck check;
        check.name = "analytic-anchors";
        check.tolerance = 1e-12;
        double worst = std::abs(cost(ModelParams::vacuum()) + 1.0 / std::sqrt(pi));
        for (double r : {0.18, 0.35, 0.74}) {
            const double v = diff_quadrature_variance(ModelParams::ideal(r));
            worst = std::max(worst, std::abs(v - 0.5 * std::exp(-2.0 * r)));
        }
        check.measured = worst;
        check.pass = worst <= check.tolerance;
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "gradient-vs-analytic-derivative";
        check.tolerance = 1e-4;
        const AnalyticCostEvaluator evaluator;
        const ModelParams p = ModelParams::ideal(0.35, 0.5);
        const GradientEstimate g = estimate_gradient(evaluator, p, 1e-3, options.seed);
        const double exact = analytic_cost_derivative(p);
        check.measured = std::abs(g.value - exact) / std::abs(exact);
        check.pass = check.measured <= check.tolerance;
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "expansion-coefficient-f";
        check.tolerance = 1e-4;
        double worst = 0.0;
        const double h = 1e-3;
        for (double n : {0.03, 0.1, 0.5, 1.0}) {
            const double r = std::asinh(std::sqrt(n));
            const double up = normalized_cost(ModelParams::ideal(r, h));
            const double mid = normalized_cost(ModelParams::ideal(r, 0.0));
            const double down = normalized_cost(ModelParams::ideal(r, -h));
            const double second_diff = (up - 2.0 * mid + down) / (h * h);
            const double expected = quadratic_coefficient_f(n);
            worst = std::max(worst, std::abs(second_diff - expected) / expected);
        }
        check.measured = worst;
        check.pass = worst <= check.tolerance;
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "seeded-expansion-limits";
        check.tolerance = 1e-3;
        std::vector<double> xs, ys;
        for (int i = -10; i <= 10; ++i)
            if (i != 0) xs.push_back(1e-2 * static_cast<double>(i) / 10.0);

        double worst = 0.0;
        // Weak-displacement limit: quadratic term 2 cosh^2 r sinh^2 r.
        for (double r : {0.3, 0.7}) {
            ys.clear();
            for (double x : xs)
                ys.push_back(seeded_cost(SeededParams{r, 1e-4, 0.0, x}) + 1.0);
            double c2 = 0.0, c4 = 0.0;
            fit_even_quartic(xs, ys, c2, c4);
            const double sc = std::sinh(r) * std::cosh(r);
            const double expected = 2.0 * sc * sc;
            worst = std::max(worst, std::abs(c2 - expected) / expected);
        }
        // Negligible-squeezing limit: quartic term N/2 with N = alpha^2.
        for (double alpha : {0.1, 0.5}) {
            ys.clear();
            for (double x : xs)
                ys.push_back(seeded_cost(SeededParams{0.0, alpha, 0.0, x}) + 1.0);
            double c2 = 0.0, c4 = 0.0;
            fit_even_quartic(xs, ys, c2, c4);
            const double expected = 0.5 * alpha * alpha;
            worst = std::max(worst, std::abs(c4 - expected) / expected);
        }
        check.measured = worst;
        check.pass = worst <= check.tolerance;
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "squeezing-round-trip";
        check.tolerance = 1e-8;
        Rng rng(derive_seed(options.seed, 0x52));
        double worst = 0.0;
        for (int i = 0; i < options.round_trip_draws; ++i) {
            ModelParams p;
            // Draw on the invertible branch (5% margin above the fold).
            for (int attempt = 0; attempt < 1000; ++attempt) {
                p.r = rng.uniform(0.0, 1.5);
                p.epsilon = rng.uniform(0.3, 1.0);
                p.epsilon_prime = rng.uniform(0.3, 1.0);
                p.n_b_prime = rng.uniform(0.0, 2.0);
                const QuadraticCoeffs q =
                    quadratic_coeffs(p.epsilon, p.epsilon_prime, p.n_in(), 1.0);
                const double fold = std::sqrt(q.c / q.a);
                if (0.5 * std::exp(-2.0 * p.r) >= 1.05 * fold) break;
            }
            const double v = diff_quadrature_variance(p.with_delta_phi(0.0));
            const double recovered = solve_r(p.epsilon, p.epsilon_prime, p.n_in(), v);
            worst = std::max(worst, std::abs(recovered - p.r));
        }
        check.measured = worst;
        check.pass = worst <= check.tolerance;
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "density-normalization";
        check.tolerance = 1e-6;
        Rng rng(derive_seed(options.seed, 0x4e));
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const ModelParams p = random_draw(rng);
            const double sd = std::sqrt(diff_quadrature_variance(p));
            const double mass_1d = integrate_gl_panels(
                [&](double x) { return marginal_diff_density(x, p); }, -12.0 * sd, 12.0 * sd, 8,
                32);
            worst = std::max(worst, std::abs(mass_1d - 1.0));

            const QuadraticForm2 form = homodyne_quadratic_form(p);
            const double s1 = std::sqrt(0.5 * form.a(1, 1));  // Var(x1) = A22/2
            const double s2 = std::sqrt(0.5 * form.a(0, 0));
            const auto& rule = gauss_legendre(48);
            double mass_2d = 0.0;
            const double h1 = 12.0 * s1, h2 = 12.0 * s2;
            for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
                const double x1 = h1 * rule.nodes[a];
                double inner = 0.0;
                for (std::size_t b = 0; b < rule.nodes.size(); ++b)
                    inner += rule.weights[b] * joint_q_density(x1, h2 * rule.nodes[b], p);
                mass_2d += rule.weights[a] * inner;
            }
            mass_2d *= h1 * h2;
            worst = std::max(worst, std::abs(mass_2d - 1.0));
        }
        check.measured = worst;
        check.pass = worst <= check.tolerance;
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "pipeline-round-trip";
        check.tolerance = 0.01;
        const ModelParams p = ModelParams::ideal(0.35, 0.3);
        const double truth = diff_quadrature_variance(p);
        const auto x = sample_diff_quadrature(p, 200000, derive_seed(options.seed, 0x70));
        const double gain = 0.8;
        const HomodyneTrace trace = synthesize_voltage_trace(
            x, gain, 0.3, 0.1 * gain * gain, derive_seed(options.seed, 0x71));
        const CostEstimate direct = process_trace_direct(trace);
        const CostEstimate hist = process_trace_histogram(trace);
        double worst = std::abs(direct.variance_x_minus - truth) / truth;
        worst = std::max(worst, std::abs(hist.variance_x_minus - truth) / truth);
        check.measured = worst;
        check.pass = worst <= check.tolerance;
        std::ostringstream detail;
        detail << "direct=" << direct.variance_x_minus << " histogram=" << hist.variance_x_minus
               << " closed-form=" << truth;
        check.detail = detail.str();
        checks.push_back(check);
    }

    {
        VerifyCheck check;
        check.name = "aic-hand-value";
        check.tolerance = 1e-4;
        check.measured = std::abs(aic(2, 10, 10.0) - 32.378770664093453);
        check.pass = check.measured <= check.tolerance;
        checks.push_back(check);
    }

    return checks;
}

}  // namespace cvqc
