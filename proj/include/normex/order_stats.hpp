#pragma once

// Pareto order statistics: marginal and joint densities, Gamma-ratio moments,
// and the law of one summand below a given order statistic.

#include <span>

#include "normex/numerics.hpp"

namespace normex {

/// Sample size and tail index; indices run 1..n with X_(1) <= ... <= X_(n).
struct OrderStatContext {
    OrderStatContext(int n, double alpha);

    int n;
    double alpha;
};

/// Density of X_(i) at x. Zero for x < 1.
double order_stat_pdf(const OrderStatContext& ctx, int i, double x);

/// Joint density of (X_(n_1), ..., X_(n_k)) at (x_1, ..., x_k). Indices must be
/// strictly increasing (DomainError otherwise); returns 0 when the points are
/// out of order or below 1.
double joint_order_stat_pdf(const OrderStatContext& ctx, std::span<const int> indices,
                            std::span<const double> points);

/// True when E[X_(j)^p] is finite, i.e. p < alpha (n - j + 1).
bool order_stat_moment_exists(const OrderStatContext& ctx, int j, double p);

/// E[X_(j)^p] from Gamma ratios in log space; UndefinedMomentError when infinite.
double order_stat_moment(const OrderStatContext& ctx, int j, double p);

/// E[X_(i) X_(j)] for i < j; UndefinedMomentError unless
/// min(n - j + 1, (n - i + 1)/2) > 1/alpha.
double order_stat_cross_moment(const OrderStatContext& ctx, int i, int j);

/// Density of one summand below the order statistic y: alpha u^(-alpha-1) / F(y)
/// on [1, y]. DomainError when y <= 1.
RealFn truncated_summand_pdf(double y, double alpha);

/// Pareto density shifted to start at y: alpha y^alpha / x^(alpha+1) on [y, inf).
RealFn shifted_pareto_pdf(double y, double alpha);
/// Tail (y/x)^alpha of the shifted Pareto law.
double shifted_pareto_survival(double y, double alpha, double x);

// Moments of Y, a variable with density truncated_summand_pdf(y, alpha).
// All need y > 1.
double summand_mean(double alpha, double y);             // mu_y
double summand_variance(double alpha, double y);         // gamma_y^2
double cond_third_abs_moment(double alpha, double y);    // E|Y - mu_y|^3
double lyapunov_ratio_C(double alpha, double y);         // E|Y - mu_y|^3 / gamma_y^3

/// (n - k) mu_y: conditional mean of the trimmed sum given X_(n-k+1) = y.
double cond_mean_m1(int n, int k, double alpha, double y);
/// (n - k) gamma_y^2: its conditional variance.
double cond_var_sigma2(int n, int k, double alpha, double y);

/// Everything about the summand law at one conditioning value, computed once.
class ConditionalSummand {
public:
    ConditionalSummand(int n, int k, double alpha, double y);

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    double alpha() const noexcept { return alpha_; }
    double y() const noexcept { return y_; }

    double mu() const noexcept { return mu_; }
    double gamma2() const noexcept { return gamma2_; }
    double gamma() const noexcept { return gamma_; }
    double third_abs() const noexcept { return third_; }
    double C() const noexcept { return third_ / (gamma2_ * gamma_); }
    double m1() const noexcept { return (n_ - k_) * mu_; }
    double sigma2() const noexcept { return (n_ - k_) * gamma2_; }

private:
    int n_, k_;
    double alpha_, y_;
    double mu_, gamma2_, gamma_, third_;
};

}  // namespace normex
