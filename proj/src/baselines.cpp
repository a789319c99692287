#include "normex/baselines.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"
#include "normex/numerics.hpp"

namespace normex {

namespace {

constexpr double kEuler = 0.5772156649015329;

void check_common(int n, double q, const char* who) {
    if (n < 1) throw DomainError(std::string(who) + ": n must be at least 1");
    if (!(q > 0.0 && q < 1.0)) throw DomainError(std::string(who) + ": q outside (0,1)");
}

void check_alpha(double alpha, const char* who) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError(std::string(who) + ": alpha must be positive");
}

}  // namespace

double centering_b_n(int n, double alpha) {
    check_alpha(alpha, "centering_b_n");
    if (alpha < 1.0) return 0.0;
    if (alpha == 1.0) return n * (std::log(static_cast<double>(n)) + 1.0 - kEuler - std::log(2.0 / std::numbers::pi));
    return n * alpha / (alpha - 1.0);
}

double gclt_d_n(int n) {
    if (n < 1) throw DomainError("gclt_d_n: n must be at least 1");
    // 2 n log x / x^2 decreases for x > sqrt(e); bisect from sqrt(2n).
    const double two_n = 2.0 * n;
    auto excess = [&](double x) { return two_n * std::log(x) - x * x; };
    double lo = std::max(std::sqrt(two_n), std::sqrt(std::numbers::e));
    if (excess(lo) <= 0.0) return lo;
    double hi = 2.0 * lo;
    while (excess(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

GcltConstants gclt_constants(int n, double alpha) {
    check_alpha(alpha, "gclt_constants");
    if (n < 1) throw DomainError("gclt_constants: n must be at least 1");
    if (alpha > 2.0) throw DomainError("gclt_constants: alpha > 2 is the normal (CLT) case");
    GcltConstants c{centering_b_n(n, alpha), 0.0, std::nullopt};
    if (alpha == 2.0) {
        c.d_n = gclt_d_n(n);
        return c;
    }
    if (alpha == 1.0) {
        c.C_alpha = std::numbers::pi / 2.0;
    } else {
        const double radicand = std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0);
        if (!(radicand > 0.0)) throw NumericalError("gclt_constants: nonpositive scaling radicand");
        c.C_alpha = std::pow(radicand, 1.0 / alpha);
    }
    return c;
}

double gclt_quantile(int n, double alpha, double q) {
    check_common(n, q, "gclt_quantile");
    const GcltConstants c = gclt_constants(n, alpha);
    if (alpha == 2.0) return *c.d_n * normal_quantile(q) + 2.0 * n;
    const double g = stable_quantile(StableSpec(alpha), q);
    return std::pow(static_cast<double>(n), 1.0 / alpha) * c.C_alpha * g + c.b_n;
}

double gclt_tail_quantile(int n, double alpha, double q, TailForm form) {
    check_common(n, q, "gclt_tail_quantile");
    if (!(alpha > 0.5 && alpha < 2.0)) throw DomainError("gclt_tail_quantile: needs 1/2 < alpha < 2");
    if (!(q > 0.95)) throw DomainError("gclt_tail_quantile: only defined for q > 0.95");
    const double base = form == TailForm::kCorrected ? 1.0 - q : q;
    return std::pow(n / base, 1.0 / alpha) + centering_b_n(n, alpha);
}

double clt_quantile(int n, double alpha, double q) {
    check_common(n, q, "clt_quantile");
    if (!(alpha > 2.0)) throw DomainError("clt_quantile: needs alpha > 2 (finite variance)");
    const double scale = std::sqrt(n * alpha) / ((alpha - 1.0) * std::sqrt(alpha - 2.0));
    return scale * normal_quantile(q) + n * alpha / (alpha - 1.0);
}

double max_evt_quantile(int n, double alpha, double q) {
    check_common(n, q, "max_evt_quantile");
    check_alpha(alpha, "max_evt_quantile");
    return std::pow(n / -std::log(q), 1.0 / alpha) + centering_b_n(n, alpha);
}

ZaliapinMoments zaliapin_moments(int n, double alpha) {
    if (!(alpha > 2.0 / 3.0 && alpha < 2.0)) throw DomainError("zaliapin_moments: needs 2/3 < alpha < 2");
    if (n < 3) throw DomainError("zaliapin_moments: needs n >= 3");
    const double r = 1.0 / alpha;
    const double lf_n = log_gamma(n + 1.0);
    // Terms indexed by i = 1..n-2 with m = n - i + 1 in [3, n].
    double m1 = 0.0, m2_diag = 0.0, cross = 0.0, prefix_b = 0.0;
    const double log_pre1 = lf_n - log_gamma(n + 1.0 - r);
    const double log_pre2 = lf_n - log_gamma(n + 1.0 - 2.0 * r);
    for (int i = 1; i <= n - 2; ++i) {
        const double m = n - i + 1.0;
        const double lf = log_gamma(m);  // (n - i)!
        m1 += std::exp(log_pre1 + log_gamma(m - r) - lf);
        m2_diag += std::exp(log_pre2 + log_gamma(m - 2.0 * r) - lf);
        // Pair (i', j = i) with i' < i: Gamma(n-j+1-r)/(n-j)! * Gamma(n-i'+1-2r)/Gamma(n-i'+1-r).
        if (i >= 2) cross += std::exp(log_gamma(m - r) - lf) * prefix_b;
        prefix_b += std::exp(log_gamma(m - 2.0 * r) - log_gamma(m - r));
    }
    const double m2 = m2_diag + 2.0 * std::exp(log_pre2) * cross;
    return {m1, m2, m2 - m1 * m1};
}

double top_two_sum_cdf(int n, double alpha, double x) {
    check_alpha(alpha, "top_two_sum_cdf");
    if (n < 2) throw DomainError("top_two_sum_cdf: needs n >= 2");
    if (std::isnan(x)) throw DomainError("top_two_sum_cdf: x is NaN");
    if (x <= 2.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    // T(x) = n int_{u <= x/2} [F(x - u) - F(u)] d(F(u)^(n-1)), u the second largest.
    const int m = n - 1;
    const double half = 0.5 * x;
    const double v_max = std::exp(m * std::log(-std::expm1(-alpha * std::log(half))));
    RealFn integrand = [&](double v) {
        if (v <= 0.0) return 1.0 - std::pow(x - 1.0, -alpha);  // u = 1
        const double one_minus = -std::expm1(std::log(v) / m);
        if (!(one_minus > 0.0)) return 0.0;
        const double u = std::pow(one_minus, -1.0 / alpha);
        if (u >= half) return 0.0;
        return one_minus - std::pow(x - u, -alpha);
    };
    QuadCfg qc;
    qc.abs_tol = 1e-12;
    qc.rel_tol = 1e-11;
    const double t = n * integrate_adaptive(integrand, 0.0, v_max, qc).value;
    return std::min(1.0, std::max(0.0, t));
}

double top_two_sum_quantile(int n, double alpha, double q) {
    check_common(n, q, "top_two_sum_quantile");
    check_alpha(alpha, "top_two_sum_quantile");
    if (n < 2) throw DomainError("top_two_sum_quantile: needs n >= 2");
    // The maximum alone has quantile (1 - q^(1/n))^(-1/alpha).
    const double max_q = std::pow(-std::expm1(std::log(q) / n), -1.0 / alpha);
    RootCfg rc;
    rc.x_tol = 1e-10 * max_q;
    rc.expand_lo = false;
    return find_root_bracketed([&](double x) { return top_two_sum_cdf(n, alpha, x) - q; }, 2.0,
                               2.0 * max_q + 2.0, rc);
}

double zaliapin_quantile(int n, double alpha, double q) {
    check_common(n, q, "zaliapin_quantile");
    const ZaliapinMoments zm = zaliapin_moments(n, alpha);
    return std::sqrt(zm.sigma2) * normal_quantile(q) + zm.m1 + top_two_sum_quantile(n, alpha, q);
}

double hermite_h2(double x) { return x * x - 1.0; }
double hermite_h3(double x) { return x * x * x - 3.0 * x; }
double hermite_h5(double x) {
    const double x2 = x * x;
    return x * (x2 * x2 - 10.0 * x2 + 15.0);
}

double edgeworth_q1(double alpha, double x) {
    const double g1 = ParetoModel(alpha).skewness();
    return -normal_pdf(x) * hermite_h2(x) * g1 / 6.0;
}

double edgeworth_q2(double alpha, double x) {
    const ParetoModel m(alpha);
    const double g1 = m.skewness();
    const double g2 = m.excess_kurtosis();
    return -normal_pdf(x) * (hermite_h5(x) * g1 * g1 / 72.0 + hermite_h3(x) * g2 / 24.0);
}

double edgeworth_correction(int n, double alpha, double x) {
    if (n < 1) throw DomainError("edgeworth_correction: n must be at least 1");
    double c = edgeworth_q1(alpha, x) / std::sqrt(static_cast<double>(n));
    if (alpha > 4.0) c += edgeworth_q2(alpha, x) / n;
    return c;
}

}  // namespace normex
