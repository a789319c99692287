#include "normex/dist_core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "normex/errors.hpp"
#include "normex/numerics.hpp"

namespace normex {

using std::numbers::pi;

namespace {

void require_level(double q, const char* who) {
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream msg;
        msg << who << ": level " << q << " outside (0,1)";
        throw DomainError(msg.str());
    }
}

[[noreturn]] void undefined_moment(const char* what, double alpha, const char* need) {
    std::ostringstream msg;
    msg << what << " of Pareto(" << alpha << ") is infinite; requires " << need;
    throw UndefinedMomentError(msg.str());
}

}  // namespace

ParetoModel::ParetoModel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("ParetoModel: alpha must be positive");
}

double ParetoModel::mean() const {
    if (alpha_ <= 1.0) undefined_moment("mean", alpha_, "alpha > 1");
    return alpha_ / (alpha_ - 1.0);
}

double ParetoModel::variance() const {
    if (alpha_ <= 2.0) undefined_moment("variance", alpha_, "alpha > 2");
    return alpha_ / ((alpha_ - 1.0) * (alpha_ - 1.0) * (alpha_ - 2.0));
}

double ParetoModel::skewness() const {
    if (alpha_ <= 3.0) undefined_moment("skewness", alpha_, "alpha > 3");
    const double a = alpha_;
    return 2.0 * (1.0 + a) / (a - 3.0) * std::sqrt((a - 2.0) / a);
}

double ParetoModel::excess_kurtosis() const {
    if (alpha_ <= 4.0) undefined_moment("excess kurtosis", alpha_, "alpha > 4");
    const double a = alpha_;
    return 6.0 * (a * a * a + a * a - 6.0 * a - 2.0) / (a * (a - 3.0) * (a - 4.0));
}

double pareto_pdf(const ParetoModel& m, double x) {
    if (x < 1.0) return 0.0;
    return m.alpha() * std::pow(x, -m.alpha() - 1.0);
}

double pareto_cdf(const ParetoModel& m, double x) {
    if (x < 1.0) return 0.0;
    return -std::expm1(-m.alpha() * std::log(x));
}

double pareto_survival(const ParetoModel& m, double x) {
    if (x < 1.0) return 1.0;
    return std::pow(x, -m.alpha());
}

double pareto_quantile(const ParetoModel& m, double z) {
    require_level(z, "pareto_quantile");
    return std::pow(1.0 - z, -1.0 / m.alpha());
}

GridDensity pareto_grid(const ParetoModel& m, std::vector<double> edges) {
    if (edges.size() < 2 || !(edges.front() >= 1.0)) throw DomainError("pareto_grid: edges must start at or above 1");
    std::vector<double> masses(edges.size() - 1);
    double prev = pareto_survival(m, edges[0]);
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double s = pareto_survival(m, edges[i + 1]);
        masses[i] = prev - s;
        prev = s;
    }
    return GridDensity::from_masses(std::move(edges), masses);
}

VarEs pareto_var_es(const ParetoModel& m, double q) {
    require_level(q, "pareto_var_es");
    VarEs out{pareto_quantile(m, q), std::nullopt};
    if (m.alpha() > 1.0) out.es = m.alpha() / (m.alpha() - 1.0) * out.var;
    return out;
}

double pareto_es(const ParetoModel& m, double q) {
    const VarEs r = pareto_var_es(m, q);
    if (!r.es) undefined_moment("expected shortfall", m.alpha(), "alpha > 1");
    return *r.es;
}

double evaluate(const ParetoModel& m, const RiskMeasure& rm) {
    return rm.kind == RiskMeasure::Kind::kVaR ? pareto_quantile(m, rm.level) : pareto_es(m, rm.level);
}

SkewKurt pareto_skew_kurt(const ParetoModel& m) {
    SkewKurt out{m.skewness(), std::nullopt};
    if (m.alpha() > 4.0) out.gamma2 = m.excess_kurtosis();
    return out;
}

// ---------------------------------------------------------------------------
// Stable law

StableSpec::StableSpec(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0 && a < 2.0)) {
        std::ostringstream msg;
        msg << "StableSpec: alpha " << a << " outside (0,2); alpha = 2 is the normal case";
        throw DomainError(msg.str());
    }
    if (b != 1.0) throw DomainError("StableSpec: only the totally skewed case beta = 1 is supported");
}

namespace {

constexpr double kStableTol = 1e-13;

// Integral of exp(-exp(log_g(theta))) over (lo, hi) where log_g is monotone
// in theta. The integrand switches from ~1 to ~0 around log_g = 0, so the
// range is split there before adaptive quadrature.
double integrate_switch(const RealFn& log_g, double lo, double hi) {
    RealFn integrand = [&](double th) {
        const double lg = log_g(th);
        if (std::isnan(lg)) return 0.0;
        if (lg > 700.0) return 0.0;
        return std::exp(-std::exp(lg));
    };
    // Locate the switch by bisection on log_g.
    const double glo = log_g(lo + 1e-15 * (hi - lo));
    const double ghi = log_g(hi - 1e-15 * (hi - lo));
    double split = 0.5 * (lo + hi);
    if (std::isfinite(glo) && std::isfinite(ghi) && (glo < 0.0) != (ghi < 0.0)) {
        double a = lo, b = hi;
        const bool increasing = glo < ghi;
        for (int i = 0; i < 200 && (b - a) > 1e-15 * (hi - lo); ++i) {
            const double m = 0.5 * (a + b);
            const double gm = log_g(m);
            if ((gm < 0.0) == increasing) {
                a = m;
            } else {
                b = m;
            }
        }
        split = 0.5 * (a + b);
    }
    QuadCfg cfg;
    cfg.abs_tol = kStableTol;
    cfg.rel_tol = 1e-12;
    cfg.max_depth = 4000;
    double total = 0.0;
    if (split > lo) total += integrate_adaptive(integrand, lo, split, cfg).value;
    if (split < hi) total += integrate_adaptive(integrand, split, hi, cfg).value;
    return total;
}

// P(X <= x) for X ~ S_alpha(1, beta, 0), alpha != 1, beta = +-1, x > 0.
double stable_cdf_positive(double alpha, double beta, double x) {
    const double theta0 = std::atan(beta * std::tan(pi * alpha / 2.0)) / alpha;
    const double c = alpha / (alpha - 1.0);
    const double log_cos_at0 = std::log(std::cos(alpha * theta0));
    const double log_x = std::log(x);
    RealFn log_g = [=](double th) {
        const double log_v = (log_cos_at0 + std::log(std::cos(th))) / (alpha - 1.0) -
                             c * std::log(std::sin(alpha * (theta0 + th))) +
                             std::log(std::cos(alpha * theta0 + (alpha - 1.0) * th));
        return c * log_x + log_v;
    };
    const double integral = integrate_switch(log_g, -theta0, pi / 2.0);
    if (alpha < 1.0) return (0.5 - theta0 / pi) + integral / pi;
    return 1.0 - integral / pi;
}

double stable_cdf_alpha_one(double x) {
    RealFn log_g = [=](double th) {
        const double a = pi / 2.0 + th;
        return -pi * x / 2.0 + std::log(2.0 / pi) + std::log(a) - std::log(std::cos(th)) + a * std::tan(th);
    };
    return integrate_switch(log_g, -pi / 2.0, pi / 2.0) / pi;
}

double clamp01(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }

}  // namespace

double stable_cdf(const StableSpec& s, double x) {
    const double a = s.alpha;
    if (std::isnan(x)) throw DomainError("stable_cdf: x is NaN");
    if (x == -INFINITY) return 0.0;
    if (x == INFINITY) return 1.0;
    if (a == 1.0) return clamp01(stable_cdf_alpha_one(x));
    if (x > 0.0) return clamp01(stable_cdf_positive(a, 1.0, x));
    const double theta0 = std::atan(std::tan(pi * a / 2.0)) / a;
    if (x == 0.0) return clamp01(0.5 - theta0 / pi);
    if (a < 1.0) return 0.0;  // support is [0, inf)
    // Reflection: X(beta) has the law of -X(-beta).
    return clamp01(1.0 - stable_cdf_positive(a, -1.0, -x));
}

double stable_quantile(const StableSpec& s, double q, const StableQuantileCfg& cfg) {
    require_level(q, "stable_quantile");
    const double a = s.alpha;
    // Right tail: P(X > x) ~ 2 Gamma(a) sin(pi a / 2) / pi * x^(-a).
    const double tail_c = 2.0 * std::tgamma(a) * std::sin(pi * a / 2.0) / pi;
    const double tail_guess = std::pow(tail_c / (1.0 - q), 1.0 / a);
    double lo = (a < 1.0) ? 0.0 : -5.0;
    double hi = std::max(5.0, 2.0 * tail_guess);
    RootCfg rc;
    rc.x_tol = cfg.x_tol;
    rc.expand_lo = (a >= 1.0);
    rc.max_expansions = 200;
    RealFn f = [&](double x) {
        if (std::abs(x) > cfg.bracket_limit) {
            throw NumericalError("stable_quantile: bracket exceeded the configured limit", std::abs(x));
        }
        return stable_cdf(s, x) - q;
    };
    return find_root_bracketed(f, lo, hi, rc);
}

// ---------------------------------------------------------------------------

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: argument must be positive");
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    require_level(p, "normal_quantile");
    const double q = p - 0.5;
    double val;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        val = q *
              (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                    6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                  1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
              (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                    3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                  5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                4.2313330701600911252e+1) * r + 1.0);
        return val;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

}  // namespace normex
