#pragma once

// Single-risk Pareto law, normal and totally skewed alpha-stable helper
// distributions, log-gamma, and the closed-form VaR / ES of one Pareto risk.

#include <optional>
#include <vector>

#include "normex/numerics.hpp"

namespace normex {

/// Pareto (type I) law with survival function x^(-alpha) on [1, inf).
class ParetoModel {
public:
    explicit ParetoModel(double alpha);

    double alpha() const noexcept { return alpha_; }

    // Moments throw UndefinedMomentError below their existence threshold.
    double mean() const;             // alpha > 1
    double variance() const;         // alpha > 2
    double skewness() const;         // alpha > 3
    double excess_kurtosis() const;  // alpha > 4

private:
    double alpha_;
};

double pareto_pdf(const ParetoModel& m, double x);
double pareto_cdf(const ParetoModel& m, double x);
double pareto_survival(const ParetoModel& m, double x);
/// (1 - z)^(-1/alpha); DomainError unless 0 < z < 1.
double pareto_quantile(const ParetoModel& m, double z);

struct VarEs {
    double var;
    std::optional<double> es;  // empty when alpha <= 1
};

/// Pareto law on the given cells (edges[0] >= 1) with exact cell masses; the
/// mass beyond edges.back() is left out.
GridDensity pareto_grid(const ParetoModel& m, std::vector<double> edges);

/// VaR and (when alpha > 1) expected shortfall at level q.
VarEs pareto_var_es(const ParetoModel& m, double q);
/// Expected shortfall alone; UndefinedMomentError when alpha <= 1.
double pareto_es(const ParetoModel& m, double q);

struct RiskMeasure {
    enum class Kind { kVaR, kES };
    Kind kind;
    double level;
};

double evaluate(const ParetoModel& m, const RiskMeasure& rm);

struct SkewKurt {
    double gamma1;
    std::optional<double> gamma2;  // empty when 3 < alpha <= 4
};

/// Skewness and excess kurtosis; UndefinedMomentError when alpha <= 3.
SkewKurt pareto_skew_kurt(const ParetoModel& m);

/// Totally skewed (beta = 1) alpha-stable law in the 1-parameterisation,
/// unit scale and zero location: the law S_alpha(1, 1, 0) that normalised
/// Pareto sums converge to with scaling (Gamma(1-alpha) cos(pi alpha/2))^(1/alpha).
struct StableSpec {
    explicit StableSpec(double alpha, double beta = 1.0);

    double alpha;
    double beta;
};

/// Distribution function via the single-integral (Zolotarev / Nolan)
/// representation, integrated adaptively.
double stable_cdf(const StableSpec& s, double x);

struct StableQuantileCfg {
    double x_tol = 1e-11;
    double bracket_limit = 1e12;
};

/// Inverse of stable_cdf by bracketed root finding.
double stable_quantile(const StableSpec& s, double q, const StableQuantileCfg& cfg = {});

/// log Gamma(x) for x > 0.
double log_gamma(double x);

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard normal CDF (Wichura AS241); DomainError unless 0 < q < 1.
double normal_quantile(double q);

}  // namespace normex
