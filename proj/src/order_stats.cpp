#include "normex/order_stats.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"

namespace normex {

namespace {

// Below this y - 1 the closed forms lose digits to cancellation and a
// Gauss-Legendre rule on [1, y] is used instead.
constexpr double kShortRange = 0.05;

double log_factorial(int m) { return log_gamma(m + 1.0); }

void check_index(const OrderStatContext& ctx, int i, const char* who) {
    if (i < 1 || i > ctx.n) {
        std::ostringstream msg;
        msg << who << ": index " << i << " outside [1, " << ctx.n << "]";
        throw DomainError(msg.str());
    }
}

void check_y(double y, const char* who) {
    if (!(y > 1.0) || !std::isfinite(y)) {
        std::ostringstream msg;
        msg << who << ": conditioning value y = " << y << " must exceed 1";
        throw DomainError(msg.str());
    }
}

// (z^t - 1) / t, with the limit log z at t = 0.
double pow_integral(double z, double t) {
    const double lz = std::log(z);
    if (t == 0.0) return lz;
    return std::expm1(t * lz) / t;
}

// F(y) = 1 - y^(-alpha).
double pareto_F(double alpha, double y) { return -std::expm1(-alpha * std::log(y)); }

double short_range_moment(double alpha, double y, double mu, int power, bool absolute) {
    const double F = pareto_F(alpha, y);
    auto term = [&](double u) {
        const double d = absolute ? std::abs(u - mu) : (u - mu);
        return std::pow(d, power) * alpha * std::pow(u, -alpha - 1.0) / F;
    };
    if (absolute && mu > 1.0 && mu < y) {
        return integrate_gauss_legendre(term, 1.0, mu) + integrate_gauss_legendre(term, mu, y);
    }
    return integrate_gauss_legendre(term, 1.0, y);
}

}  // namespace

OrderStatContext::OrderStatContext(int n_, double alpha_) : n(n_), alpha(alpha_) {
    if (n < 1) throw DomainError("OrderStatContext: n must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("OrderStatContext: alpha must be positive");
}

double order_stat_pdf(const OrderStatContext& ctx, int i, double x) {
    check_index(ctx, i, "order_stat_pdf");
    if (!(x >= 1.0)) return 0.0;
    const double a = ctx.alpha;
    const int n = ctx.n;
    const double lx = std::log(x);
    double log_f = log_factorial(n) - log_factorial(i - 1) - log_factorial(n - i) + std::log(a) -
                   (a * (n - i + 1) + 1.0) * lx;
    if (i > 1) {
        if (x == 1.0) return 0.0;
        log_f += (i - 1) * std::log(pareto_F(a, x));
    }
    return std::exp(log_f);
}

double joint_order_stat_pdf(const OrderStatContext& ctx, std::span<const int> indices,
                            std::span<const double> points) {
    if (indices.empty() || indices.size() != points.size()) {
        throw DomainError("joint_order_stat_pdf: need as many points as indices");
    }
    for (std::size_t j = 0; j < indices.size(); ++j) {
        check_index(ctx, indices[j], "joint_order_stat_pdf");
        if (j > 0 && indices[j] <= indices[j - 1]) {
            throw DomainError("joint_order_stat_pdf: indices must be strictly increasing");
        }
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (!(points[j] >= 1.0)) return 0.0;
        if (j > 0 && points[j] < points[j - 1]) return 0.0;
    }
    const double a = ctx.alpha;
    const std::size_t k = indices.size();
    double log_f = log_factorial(ctx.n) + k * std::log(a);
    for (double x : points) log_f -= (a + 1.0) * std::log(x);

    // Gaps: F(x_1)^(n_1 - 1), (F(x_{j+1}) - F(x_j))^(gap), (1 - F(x_k))^(n - n_k).
    auto add_power = [&](double base, int power) {
        log_f -= log_factorial(power);
        if (power == 0) return true;
        if (base <= 0.0) return false;
        log_f += power * std::log(base);
        return true;
    };
    if (!add_power(pareto_F(a, points[0]), indices[0] - 1)) return 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const double gap = std::pow(points[j], -a) - std::pow(points[j + 1], -a);
        if (!add_power(gap, indices[j + 1] - indices[j] - 1)) return 0.0;
    }
    if (!add_power(std::pow(points[k - 1], -a), ctx.n - indices[k - 1])) return 0.0;
    return std::exp(log_f);
}

bool order_stat_moment_exists(const OrderStatContext& ctx, int j, double p) {
    check_index(ctx, j, "order_stat_moment_exists");
    return p < ctx.alpha * (ctx.n - j + 1);
}

double order_stat_moment(const OrderStatContext& ctx, int j, double p) {
    if (!order_stat_moment_exists(ctx, j, p)) {
        std::ostringstream msg;
        msg << "order_stat_moment: E[X_(" << j << ")^" << p << "] is infinite for n = " << ctx.n
            << ", alpha = " << ctx.alpha << " (needs p < alpha (n - j + 1))";
        throw UndefinedMomentError(msg.str());
    }
    const int n = ctx.n;
    const double r = p / ctx.alpha;
    return std::exp(log_factorial(n) - log_factorial(n - j) + log_gamma(n - j + 1 - r) -
                    log_gamma(n + 1 - r));
}

double order_stat_cross_moment(const OrderStatContext& ctx, int i, int j) {
    check_index(ctx, i, "order_stat_cross_moment");
    check_index(ctx, j, "order_stat_cross_moment");
    if (!(i < j)) throw DomainError("order_stat_cross_moment: need i < j");
    const int n = ctx.n;
    const double r = 1.0 / ctx.alpha;
    if (!(std::min<double>(n - j + 1, 0.5 * (n - i + 1)) > r)) {
        std::ostringstream msg;
        msg << "order_stat_cross_moment: E[X_(" << i << ") X_(" << j << ")] is infinite for n = " << n
            << ", alpha = " << ctx.alpha;
        throw UndefinedMomentError(msg.str());
    }
    return std::exp(log_factorial(n) - log_factorial(n - j) + log_gamma(n - j + 1 - r) +
                    log_gamma(n - i + 1 - 2 * r) - log_gamma(n - i + 1 - r) - log_gamma(n + 1 - 2 * r));
}

RealFn truncated_summand_pdf(double y, double alpha) {
    check_y(y, "truncated_summand_pdf");
    const double F = pareto_F(alpha, y);
    return [=](double u) {
        if (u < 1.0 || u > y) return 0.0;
        return alpha * std::pow(u, -alpha - 1.0) / F;
    };
}

RealFn shifted_pareto_pdf(double y, double alpha) {
    if (!(y >= 1.0)) throw DomainError("shifted_pareto_pdf: y must be at least 1");
    return [=](double x) {
        if (x < y) return 0.0;
        return alpha / x * std::pow(y / x, alpha);
    };
}

double shifted_pareto_survival(double y, double alpha, double x) {
    if (x <= y) return 1.0;
    return std::pow(y / x, alpha);
}

double summand_mean(double alpha, double y) {
    check_y(y, "summand_mean");
    return alpha * pow_integral(y, 1.0 - alpha) / pareto_F(alpha, y);
}

double summand_variance(double alpha, double y) {
    check_y(y, "summand_variance");
    const double mu = summand_mean(alpha, y);
    if (y - 1.0 < kShortRange) return short_range_moment(alpha, y, mu, 2, false);
    const double e2 = alpha * pow_integral(y, 2.0 - alpha) / pareto_F(alpha, y);
    return e2 - mu * mu;
}

double cond_third_abs_moment(double alpha, double y) {
    check_y(y, "cond_third_abs_moment");
    const double mu = summand_mean(alpha, y);
    if (!(mu > 1.0 && mu < y)) throw NumericalError("cond_third_abs_moment: mean outside (1, y)");
    if (y - 1.0 < kShortRange) return short_range_moment(alpha, y, mu, 3, true);
    // h(z) = int_1^z (mu - u)^3 u^(-alpha-1) du; the absolute moment is
    // (alpha / F) [2 h(mu) - h(y)].
    auto h = [&](double z) {
        return mu * mu * mu * pow_integral(z, -alpha) - 3.0 * mu * mu * pow_integral(z, 1.0 - alpha) +
               3.0 * mu * pow_integral(z, 2.0 - alpha) - pow_integral(z, 3.0 - alpha);
    };
    return alpha / pareto_F(alpha, y) * (2.0 * h(mu) - h(y));
}

double lyapunov_ratio_C(double alpha, double y) {
    const double g2 = summand_variance(alpha, y);
    return cond_third_abs_moment(alpha, y) / (g2 * std::sqrt(g2));
}

namespace {
void check_nk(int n, int k, const char* who) {
    if (!(k >= 1 && k < n)) {
        std::ostringstream msg;
        msg << who << ": need 1 <= k < n (n = " << n << ", k = " << k << ")";
        throw DomainError(msg.str());
    }
}
}  // namespace

double cond_mean_m1(int n, int k, double alpha, double y) {
    check_nk(n, k, "cond_mean_m1");
    return (n - k) * summand_mean(alpha, y);
}

double cond_var_sigma2(int n, int k, double alpha, double y) {
    check_nk(n, k, "cond_var_sigma2");
    return (n - k) * summand_variance(alpha, y);
}

ConditionalSummand::ConditionalSummand(int n, int k, double alpha, double y)
    : n_(n), k_(k), alpha_(alpha), y_(y) {
    check_nk(n, k, "ConditionalSummand");
    mu_ = summand_mean(alpha, y);
    gamma2_ = summand_variance(alpha, y);
    gamma_ = std::sqrt(gamma2_);
    third_ = cond_third_abs_moment(alpha, y);
}

}  // namespace normex
