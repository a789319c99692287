#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"
#include "normex/numerics.hpp"

using namespace normex;

namespace {

double sup_cdf_distance(const GridDensity& a, const GridDensity& b) {
    double d = 0.0;
    for (double x : a.edges()) d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
    for (double x : b.edges()) d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
    return d;
}

GridDensity box(double start, double step, std::size_t cells) {
    return GridDensity::uniform(start, step, std::vector<double>(cells, 1.0 / (step * cells)));
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("quadrature on simple integrals") {
    CHECK(integrate_adaptive([](double x) { return x; }, 0.0, 1.0).value == doctest::Approx(0.5).epsilon(1e-14));

    const double alpha = 2.5;
    auto pdf = [&](double x) { return alpha * std::pow(x, -alpha - 1.0); };
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(std::abs(integrate_adaptive(pdf, 1.0, inf).value - 1.0) <= 1e-10);
    QuadCfg flat;
    flat.transform = QuadTransform::kParetoFlatten;
    flat.alpha = alpha;
    CHECK(std::abs(integrate_adaptive(pdf, 1.0, inf, flat).value - 1.0) <= 1e-10);

    QuadCfg smooth;
    smooth.transform = QuadTransform::kEndpointSmooth;
    const auto r = integrate_adaptive([](double u) { return 1.0 / std::sqrt(u); }, 0.0, 1.0, smooth);
    CHECK(std::abs(r.value - 2.0) <= 1e-8);
}

TEST_CASE("quadrature error estimates are honest") {
    struct Case {
        RealFn f;
        double a, b, exact;
    };
    const double pi = std::numbers::pi;
    const std::vector<Case> battery{
        {[](double x) { return std::exp(x); }, 0.0, 1.0, std::exp(1.0) - 1.0},
        {[](double x) { return std::sin(x); }, 0.0, pi, 2.0},
        {[](double x) { return 1.0 / (1.0 + x * x); }, -5.0, 5.0, 2.0 * std::atan(5.0)},
        {[](double x) { return std::sqrt(x); }, 0.0, 1.0, 2.0 / 3.0},
        {[](double x) { return std::log(x); }, 1e-12, 1.0, -1.0 + 1e-12 - 1e-12 * std::log(1e-12)},
        {[](double x) { return x * x * x * x * x; }, -1.0, 2.0, (64.0 - 1.0) / 6.0},
        {[](double x) { return std::exp(-x * x); }, -6.0, 6.0, std::sqrt(pi) * std::erf(6.0)},
        {[](double x) { return std::cos(20.0 * x); }, 0.0, 1.0, std::sin(20.0) / 20.0},
        {[](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 0.5 * (0.09 + 0.49)},
        {[](double x) { return 1.0 / (x * x); }, 1.0, 100.0, 0.99},
    };
    for (std::size_t i = 0; i < battery.size(); ++i) {
        CAPTURE(i);
        QuadCfg cfg;
        cfg.abs_tol = 1e-7;
        cfg.rel_tol = 1e-7;
        const auto& c = battery[i];
        const auto r = integrate_adaptive(c.f, c.a, c.b, cfg);
        const double true_err = std::abs(r.value - c.exact);
        // Rounding floor: a few ulps of the value.
        CHECK(true_err <= std::max(10.0 * r.error, 1e-14 * std::abs(c.exact)));
        CHECK(r.error <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(r.value)));
    }
}

TEST_CASE("quadrature non-convergence is reported") {
    QuadCfg cfg;
    cfg.max_depth = 3;
    cfg.abs_tol = 1e-14;
    cfg.rel_tol = 1e-14;
    auto f = [](double x) { return std::sin(200.0 * x) * std::exp(x); };
    CHECK_THROWS_AS(integrate_adaptive(f, 0.0, 3.0, cfg), NumericalError);
    cfg.throw_on_failure = false;
    const auto r = integrate_adaptive(f, 0.0, 3.0, cfg);
    CHECK_FALSE(r.converged);
    CHECK(std::isfinite(r.value));
}

TEST_CASE("bracketed root finding") {
    CHECK(std::abs(find_root_bracketed([](double x) { return x * x - 2.0; }, 1.0, 2.0) - std::sqrt(2.0)) <= 1e-12);

    // Expansion from a bracket that does not contain the root.
    CHECK(std::abs(find_root_bracketed([](double x) { return x - 50.0; }, 0.0, 1.0) - 50.0) <= 1e-10);

    const ParetoModel m(2.5);
    for (double z : {0.1, 0.5, 0.9, 0.99, 0.9999}) {
        const double x = find_root_bracketed([&](double t) { return pareto_cdf(m, t) - z; }, 1.0, 2.0);
        CHECK(std::abs(x - pareto_quantile(m, z)) <= 1e-10 * pareto_quantile(m, z));
    }

    CHECK_THROWS_AS(find_root_bracketed([](double x) { return x * x + 1.0; }, -1.0, 1.0), NumericalError);
}

TEST_CASE("root finding tolerates bounded noise") {
    // Slope 0.01 and noise up to 1e-6 move the root by at most 1e-4.
    const double root = 3.7;
    auto noisy = [&](double x) {
        const double noise = 1e-6 * std::sin(1e7 * x);
        return 0.01 * (x - root) + noise;
    };
    RootCfg cfg;
    cfg.x_tol = 1e-9;
    CHECK(std::abs(find_root_bracketed(noisy, 0.0, 10.0, cfg) - root) <= 1e-4);
}

TEST_CASE("uniform convolution gives the triangle") {
    const auto u = box(0.0, 0.001, 1000);
    const auto t = grid_convolve(u, u);
    CHECK(t.support_start() == doctest::Approx(0.0));
    CHECK(t.support_end() == doctest::Approx(2.0));
    CHECK(t.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.pdf(1.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(t.pdf(0.5) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(t.cdf(1.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("narrow density acts as a shift") {
    const ParetoModel m(2.5);
    const auto g = pareto_grid(m, make_mixed_edges(1.0, 0.01, 200, 1.02, 1e4));
    const auto delta = box(3.0, 0.01, 1);
    const auto s = grid_convolve(g, delta);
    double d = 0.0;
    for (double x = 4.0; x < 60.0; x += 0.05) d = std::max(d, std::abs(s.cdf(x) - g.cdf(x - 3.0)));
    // Smearing over one cell moves the CDF by at most max pdf * width.
    CHECK(d <= 2.5 * 0.01);
    CHECK(s.support_start() == doctest::Approx(4.0));
}

TEST_CASE("mass, support and mean are preserved") {
    const double alpha = 2.5, y = 2.0;
    const ParetoModel m(alpha);
    const auto h = pareto_grid(m, make_mixed_edges(1.0, 0.005, 200, 1.01, std::pow(1e-12, -1.0 / alpha))).scaled(y);
    const auto hh = grid_convolve(h, h);
    CHECK(std::abs(hh.mass() - h.mass() * h.mass()) <= 1e-6);
    CHECK(hh.support_start() == doctest::Approx(2.0 * y));
    const double mean = y * alpha / (alpha - 1.0);
    CHECK(hh.mean() == doctest::Approx(2.0 * mean).epsilon(1e-3));
}

TEST_CASE("convolution is commutative and associative") {
    const auto a = GridDensity::uniform(0.0, 0.01, {1.0, 3.0, 5.0, 2.0, 0.5, 0.5, 4.0, 6.0});
    const auto b = GridDensity::uniform(1.0, 0.01, {2.0, 2.0, 1.0, 7.0, 3.0});
    const auto c = GridDensity::uniform(-0.5, 0.01, {5.0, 1.0, 1.0, 3.0, 2.0, 8.0});
    CHECK(sup_cdf_distance(grid_convolve(a, b), grid_convolve(b, a)) <= 1e-8 * a.mass() * b.mass());
    const auto left = grid_convolve(grid_convolve(a, b), c);
    const auto right = grid_convolve(a, grid_convolve(b, c));
    CHECK(sup_cdf_distance(left, right) <= 1e-8 * left.mass());

    // Non-uniform cells go through resampling; commutativity still holds.
    const ParetoModel m(1.5);
    const auto p = pareto_grid(m, make_mixed_edges(1.0, 0.01, 50, 1.05, 500.0));
    const auto q = pareto_grid(ParetoModel(3.0), make_mixed_edges(1.0, 0.02, 30, 1.1, 200.0));
    CHECK(sup_cdf_distance(grid_convolve(p, q), grid_convolve(q, p)) <= 1e-8);
}

TEST_CASE("grid density queries") {
    const auto g = GridDensity::from_masses({0.0, 1.0, 3.0}, std::vector<double>{0.25, 0.75});
    CHECK(g.mass() == doctest::Approx(1.0));
    CHECK(g.pdf(0.5) == doctest::Approx(0.25));
    CHECK(g.pdf(2.0) == doctest::Approx(0.375));
    CHECK(g.cdf(2.0) == doctest::Approx(0.625));
    CHECK(g.quantile(0.625) == doctest::Approx(2.0));
    CHECK_FALSE(g.is_uniform());
    CHECK(g.max_width_ratio() == doctest::Approx(2.0));
    CHECK(g.truncated(1.5).cells() == 1);
    CHECK_THROWS_AS(GridDensity({0.0, 1.0}, {-1.0}), DomainError);
}

}  // TEST_SUITE
