#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"
#include "normex/numerics.hpp"
#include "normex/order_stats.hpp"
#include "support.hpp"

using namespace normex;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

QuadCfg tight() {
    QuadCfg c;
    c.abs_tol = 1e-13;
    c.rel_tol = 1e-12;
    c.max_depth = 5000;
    return c;
}

// Moments of the truncated summand law by direct quadrature against g.
struct QuadMoments {
    double mu, var, third;
};

QuadMoments quad_moments(double alpha, double y) {
    const auto g = truncated_summand_pdf(y, alpha);
    const double mu = integrate_adaptive([&](double u) { return u * g(u); }, 1.0, y, tight()).value;
    const double var = integrate_adaptive([&](double u) { return (u - mu) * (u - mu) * g(u); }, 1.0, y, tight()).value;
    auto abs3 = [&](double u) { return std::pow(std::abs(u - mu), 3) * g(u); };
    const double third = integrate_adaptive(abs3, 1.0, mu, tight()).value + integrate_adaptive(abs3, mu, y, tight()).value;
    return {mu, var, third};
}

}  // namespace

TEST_SUITE("order_stats") {

TEST_CASE("marginal density") {
    for (double a : {0.7, 2.5}) {
        const OrderStatContext one(1, a);
        CHECK(order_stat_pdf(one, 1, 3.0) == doctest::Approx(a * std::pow(3.0, -a - 1.0)));
    }
    CHECK(order_stat_pdf(OrderStatContext(2, 2.0), 2, 2.0) == doctest::Approx(0.375));
    CHECK(order_stat_pdf(OrderStatContext(5, 2.0), 3, 0.5) == 0.0);

    const OrderStatContext ctx(52, 2.5);
    QuadCfg cfg = tight();
    cfg.transform = QuadTransform::kParetoFlatten;
    cfg.alpha = 2.5;
    for (int i : {1, 26, 50, 52}) {
        CAPTURE(i);
        const double mass = integrate_adaptive([&](double x) { return order_stat_pdf(ctx, i, x); }, 1.0, kInf, cfg).value;
        CHECK(std::abs(mass - 1.0) <= 1e-8);
    }
    CHECK_THROWS_AS(order_stat_pdf(ctx, 0, 2.0), DomainError);
    CHECK_THROWS_AS(order_stat_pdf(ctx, 53, 2.0), DomainError);
}

TEST_CASE("maximum of two: density against simulation") {
    std::mt19937_64 g(99);
    const int N = 400000;
    int hits = 0;
    for (int r = 0; r < N; ++r) {
        const double m = std::max(testing_support::pareto_draw(g, 2.0), testing_support::pareto_draw(g, 2.0));
        hits += (m >= 1.9 && m < 2.1);
    }
    const OrderStatContext ctx(2, 2.0);
    const double p = integrate_adaptive([&](double x) { return order_stat_pdf(ctx, 2, x); }, 1.9, 2.1).value;
    const double se = std::sqrt(p * (1 - p) / N);
    CHECK(std::abs(double(hits) / N - p) <= 4.0 * se);
}

TEST_CASE("joint density") {
    const OrderStatContext ctx(6, 1.7);
    const std::array<int, 1> one{4};
    const std::array<double, 1> x1{2.3};
    CHECK(joint_order_stat_pdf(ctx, one, x1) == doctest::Approx(order_stat_pdf(ctx, 4, 2.3)));

    const OrderStatContext two(2, 1.0);
    const std::array<int, 2> idx{1, 2};
    const std::array<double, 2> pts{2.0, 3.0};
    CHECK(joint_order_stat_pdf(two, idx, pts) == doctest::Approx(2.0 / 36.0));
    const std::array<double, 2> swapped{3.0, 2.0};
    CHECK(joint_order_stat_pdf(two, idx, swapped) == 0.0);
    const std::array<int, 2> bad{2, 1};
    CHECK_THROWS_AS(joint_order_stat_pdf(two, bad, pts), DomainError);

    // Top two: n (n-1) F^(n-2)(x) f(x) f(y).
    const int n = 7;
    const double a = 2.2;
    const OrderStatContext top(n, a);
    const ParetoModel m(a);
    const std::array<int, 2> ti{n - 1, n};
    for (auto [x, y] : {std::pair{1.5, 2.0}, std::pair{3.0, 3.5}, std::pair{1.1, 9.0}}) {
        const std::array<double, 2> p{x, y};
        const double expect = n * (n - 1) * std::pow(pareto_cdf(m, x), n - 2) * pareto_pdf(m, x) * pareto_pdf(m, y);
        CHECK(joint_order_stat_pdf(top, ti, p) == doctest::Approx(expect).epsilon(1e-12));
    }

    // Integrating out the lower coordinate gives the marginal of the upper one.
    const std::array<int, 2> mid{2, 5};
    for (double y : {1.5, 2.5, 6.0}) {
        const double marg = integrate_adaptive(
            [&](double x) {
                const std::array<double, 2> p{x, y};
                return joint_order_stat_pdf(ctx, mid, p);
            },
            1.0, y, tight()).value;
        CHECK(marg == doctest::Approx(order_stat_pdf(ctx, 5, y)).epsilon(1e-9));
    }
}

TEST_CASE("order statistic moments") {
    CHECK(order_stat_moment(OrderStatContext(1, 2.5), 1, 1) == doctest::Approx(5.0 / 3.0));
    CHECK(order_stat_moment(OrderStatContext(2, 2.0), 2, 1) == doctest::Approx(8.0 / 3.0));
    CHECK_THROWS_AS(order_stat_moment(OrderStatContext(5, 2.0), 5, 4), UndefinedMomentError);
    CHECK_FALSE(order_stat_moment_exists(OrderStatContext(5, 2.0), 5, 4));
    // Log space keeps large n finite.
    CHECK(std::isfinite(order_stat_moment(OrderStatContext(1000, 2.5), 990, 2)));

    // Against quadrature of the marginal density.
    const OrderStatContext ctx(9, 1.3);
    QuadCfg cfg = tight();
    cfg.transform = QuadTransform::kParetoFlatten;
    cfg.alpha = 1.3;
    for (int j : {2, 5, 8}) {
        const double q = integrate_adaptive([&](double x) { return x * x * order_stat_pdf(ctx, j, x); }, 1.0, kInf, cfg).value;
        CHECK(order_stat_moment(ctx, j, 2) == doctest::Approx(q).epsilon(1e-8));
    }
}

TEST_CASE("moment existence reproduces the table of conditions") {
    // E X_(n-k)^p < inf iff alpha (k + 1) > p.
    const int n = 20;
    for (int k = 0; k <= 7; ++k)
        for (int p : {2, 3, 4}) {
            const double threshold = double(p) / (k + 1);
            CAPTURE(k);
            CAPTURE(p);
            CHECK_FALSE(order_stat_moment_exists(OrderStatContext(n, threshold), n - k, p));
            CHECK(order_stat_moment_exists(OrderStatContext(n, threshold * (1 + 1e-9)), n - k, p));
            CHECK_FALSE(order_stat_moment_exists(OrderStatContext(n, threshold * 0.99), n - k, p));
        }
}

TEST_CASE("cross moments") {
    const OrderStatContext c(2, 3.0);
    const double expect = 2.0 * std::tgamma(2.0 / 3.0) * std::tgamma(4.0 / 3.0) / (std::tgamma(5.0 / 3.0) * std::tgamma(7.0 / 3.0));
    CHECK(order_stat_cross_moment(c, 1, 2) == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(order_stat_cross_moment(OrderStatContext(2, 0.4), 1, 2), UndefinedMomentError);
    CHECK_THROWS_AS(order_stat_cross_moment(c, 2, 1), DomainError);

    // Monte Carlo over sorted pairs.
    std::mt19937_64 g(5);
    const int N = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < N; ++r) {
        const double v = testing_support::pareto_draw(g, 3.0) * testing_support::pareto_draw(g, 3.0);
        s += v;
        s2 += v * v;
    }
    const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
    CHECK(std::abs(mean - expect) <= 4.0 * se);

    // Positive association.
    const OrderStatContext ctx(3, 3.0);
    for (auto [i, j] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
        CHECK(order_stat_cross_moment(ctx, i, j) >= order_stat_moment(ctx, i, 1) * order_stat_moment(ctx, j, 1));
    }
}

TEST_CASE("truncated and shifted summand laws") {
    const auto g = truncated_summand_pdf(2.0, 1.0);
    CHECK(g(1.5) == doctest::Approx(2.0 / 2.25));
    CHECK(g(2.5) == 0.0);
    CHECK(g(0.5) == 0.0);
    for (double a : {0.6, 1.0, 2.5}) {
        for (double y : {1.01, 3.0, 50.0}) {
            const auto gy = truncated_summand_pdf(y, a);
            CHECK(integrate_adaptive(gy, 1.0, y, tight()).value == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(truncated_summand_pdf(1.0, 2.0), DomainError);
    CHECK_THROWS_AS(truncated_summand_pdf(0.5, 2.0), DomainError);

    const auto h1 = shifted_pareto_pdf(1.0, 2.5);
    CHECK(h1(3.0) == doctest::Approx(pareto_pdf(ParetoModel(2.5), 3.0)));
    CHECK(shifted_pareto_survival(3.0, 2.5, 6.0) == doctest::Approx(std::pow(2.0, -2.5)));
    const auto h = shifted_pareto_pdf(3.0, 2.5);
    CHECK(h(6.0) == doctest::Approx(2.5 * std::pow(3.0, 2.5) / std::pow(6.0, 3.5)));
    CHECK(h(6.0) == doctest::Approx(0.073657).epsilon(1e-5));
    CHECK(h(2.9) == 0.0);
    CHECK(integrate_adaptive(h, 3.0, kInf, tight()).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("conditional moments against quadrature") {
    for (double a : {0.6, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0}) {
        for (double y : {1.01, 2.0, 5.0, 50.0}) {
            CAPTURE(a);
            CAPTURE(y);
            const auto q = quad_moments(a, y);
            CHECK(summand_mean(a, y) == doctest::Approx(q.mu).epsilon(1e-7));
            CHECK(summand_variance(a, y) == doctest::Approx(q.var).epsilon(1e-7));
            CHECK(cond_third_abs_moment(a, y) == doctest::Approx(q.third).epsilon(1e-7));
            CHECK(cond_mean_m1(52, 3, a, y) == doctest::Approx(49 * q.mu).epsilon(1e-7));
            CHECK(cond_var_sigma2(52, 3, a, y) == doctest::Approx(49 * q.var).epsilon(1e-7));
            CHECK(lyapunov_ratio_C(a, y) == doctest::Approx(q.third / std::pow(q.var, 1.5)).epsilon(1e-6));
        }
    }
}

TEST_CASE("conditional moments: spot values and limits") {
    // alpha = 2 branch.
    const double expect = 98.0 * 2.0 * (16.0 / 15.0) * (std::log(4.0) - 2.0 * 0.6);
    CHECK(cond_var_sigma2(100, 2, 2.0, 4.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(cond_var_sigma2(100, 2, 2.0, 4.0) == doctest::Approx(38.95).epsilon(1e-3));

    const auto q = quad_moments(2.5, 5.0);
    CHECK(cond_mean_m1(52, 1, 2.5, 5.0) == doctest::Approx(51 * q.mu).epsilon(1e-8));
    CHECK(cond_var_sigma2(52, 1, 2.5, 5.0) == doctest::Approx(51 * q.var).epsilon(1e-8));

    // y -> 1+: the summand law collapses onto 1.
    CHECK(cond_mean_m1(52, 2, 2.5, 1.0 + 1e-9) == doctest::Approx(50.0).epsilon(1e-8));
    CHECK(cond_var_sigma2(52, 2, 2.5, 1.0 + 1e-9) <= 1e-15);
    CHECK(cond_third_abs_moment(2.5, 1.0 + 1e-9) <= 1e-25);
    // y -> inf: unconditional mean.
    CHECK(cond_mean_m1(52, 2, 2.5, 1e12) == doctest::Approx(50 * 2.5 / 1.5).epsilon(1e-8));

    CHECK_THROWS_AS(summand_mean(2.5, 1.0), DomainError);
    CHECK_THROWS_AS(cond_third_abs_moment(2.5, 0.9), DomainError);
}

TEST_CASE("Lyapunov ratio") {
    const auto q = quad_moments(2.5, 2.0);
    CHECK(lyapunov_ratio_C(2.5, 2.0) == doctest::Approx(q.third / std::pow(q.var, 1.5)).epsilon(1e-6));

    // Invariant under shifting the variable: recompute with u -> u + 10.
    const auto g = truncated_summand_pdf(2.0, 2.5);
    const double mu_s = integrate_adaptive([&](double v) { return v * g(v - 10.0); }, 11.0, 12.0, tight()).value;
    const double var_s = integrate_adaptive([&](double v) { return (v - mu_s) * (v - mu_s) * g(v - 10.0); }, 11.0, 12.0, tight()).value;
    auto a3 = [&](double v) { return std::pow(std::abs(v - mu_s), 3) * g(v - 10.0); };
    const double t_s = integrate_adaptive(a3, 11.0, mu_s, tight()).value + integrate_adaptive(a3, mu_s, 12.0, tight()).value;
    CHECK(lyapunov_ratio_C(2.5, 2.0) == doctest::Approx(t_s / std::pow(var_s, 1.5)).epsilon(1e-6));

    // No jumps on a fine grid (relative step 1e-4), including across the
    // switch to the short-range quadrature near y = 1.
    for (double a : {0.7, 1.5, 2.5, 3.5}) {
        double prev = lyapunov_ratio_C(a, 1.001);
        for (double y = 1.001 * 1.0001; y < 30.0; y *= 1.0001) {
            const double c = lyapunov_ratio_C(a, y);
            CHECK(c > 0.0);
            CHECK(std::abs(c - prev) <= 1e-3);
            prev = c;
        }
    }
    // y -> 1+: the law becomes uniform on [1, y] to first order; its ratio is 3 sqrt(3) / 4.
    const double limit = 3.0 * std::sqrt(3.0) / 4.0;
    for (double a : {0.6, 2.5, 4.0}) {
        CHECK(lyapunov_ratio_C(a, 1.0 + 1e-7) == doctest::Approx(limit).epsilon(1e-5));
        CHECK(lyapunov_ratio_C(a, 1.0 + 1e-4) == doctest::Approx(limit).epsilon(1e-3));
    }
}

TEST_CASE("ConditionalSummand") {
    const ConditionalSummand s(52, 2, 2.5, 3.0);
    CHECK(s.mu() == doctest::Approx(summand_mean(2.5, 3.0)));
    CHECK(s.gamma2() == doctest::Approx(summand_variance(2.5, 3.0)));
    CHECK(s.C() == doctest::Approx(lyapunov_ratio_C(2.5, 3.0)));
    CHECK(s.m1() == doctest::Approx(cond_mean_m1(52, 2, 2.5, 3.0)));
    CHECK(s.sigma2() == doctest::Approx(cond_var_sigma2(52, 2, 2.5, 3.0)));
    for (double y : {1.01, 2.0, 10.0, 1e4}) {
        const ConditionalSummand c(52, 1, 2.5, y);
        CHECK(c.sigma2() > 0.0);
        CHECK(c.m1() / 51 > 1.0);
        CHECK(c.m1() / 51 < 2.5 / 1.5);
    }
    CHECK_THROWS_AS(ConditionalSummand(52, 2, 2.5, 1.0), DomainError);
    CHECK_THROWS_AS(ConditionalSummand(5, 5, 2.5, 2.0), DomainError);
}

TEST_CASE("Markov property of the order statistics") {
    // Given X_(n-k+1) = y, the n - k smaller values are iid with density g_y.
    const int n = 6, k = 2;
    const double alpha = 2.5, y_lo = 1.5, y_hi = 1.6;
    std::mt19937_64 gen(2024);
    std::vector<double> trimmed, reference;
    std::array<double, n> x{};
    while (trimmed.size() < 20000) {
        for (auto& v : x) v = testing_support::pareto_draw(gen, alpha);
        std::sort(x.begin(), x.end());
        const double y = x[n - k];
        if (y < y_lo || y >= y_hi) continue;
        double t = 0.0;
        for (int i = 0; i < n - k; ++i) t += x[i];
        trimmed.push_back(t);
        // n - k draws from g_y by inversion of F restricted to [1, y].
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double Fy = 1.0 - std::pow(y, -alpha);
        double s = 0.0;
        for (int i = 0; i < n - k; ++i) s += std::pow(1.0 - u(gen) * Fy, -1.0 / alpha);
        reference.push_back(s);
    }
    const double d = testing_support::ks_two_sample(trimmed, reference);
    CHECK(d <= testing_support::ks_crit_1pct(trimmed.size(), reference.size()));
}

}  // TEST_SUITE
