#include "normex/error_bound.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"
#include "normex/normex.hpp"
#include "normex/numerics.hpp"
#include "normex/order_stats.hpp"

namespace normex {

namespace {

void check_K_args(int n, double alpha, const BoundCfg& cfg) {
    if (n < 2) throw DomainError("berry_esseen_K: needs n >= 2");
    const double upper = cfg.allow_extrapolation ? 4.0 : 3.0;
    if (!(alpha > 2.0 && alpha <= upper)) {
        std::ostringstream msg;
        msg << "berry_esseen_K: alpha = " << alpha << " outside (2, " << upper << "]";
        if (!cfg.allow_extrapolation) msg << "; alpha up to 4 needs the extrapolation flag";
        throw DomainError(msg.str());
    }
}

double K_unchecked(int n, double alpha, double x, const BoundCfg& cfg) {
    if (!(x > 1.0)) return 0.0;
    const double rn = std::sqrt(n - 1.0);
    // u = F(y)^n carries the density of the maximum.
    const double u_max = std::exp(n * std::log(-std::expm1(-alpha * std::log(x))));
    RealFn integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double one_minus = -std::expm1(std::log(u) / n);
        if (!(one_minus > 0.0)) return 0.0;
        const double y = std::pow(one_minus, -1.0 / alpha);
        if (y - 1.0 < 1e-9 || y >= x) return 0.0;
        const double mu = summand_mean(alpha, y);
        const double g2 = summand_variance(alpha, y);
        const double g = std::sqrt(g2);
        const double C = cond_third_abs_moment(alpha, y) / (g2 * g);
        if (cfg.uniform_form) return C;
        const double z = (x - y - (n - 1) * mu) / (rn * g);
        const double d = 1.0 + std::abs(z);
        return C / (d * d * d);
    };
    QuadCfg qc;
    qc.abs_tol = cfg.abs_tol;
    qc.rel_tol = cfg.rel_tol;
    qc.max_depth = 4000;
    return cfg.c / rn * integrate_adaptive(integrand, 0.0, u_max, qc).value;
}

}  // namespace

double berry_esseen_K(int n, double alpha, double x, const BoundCfg& cfg) {
    check_K_args(n, alpha, cfg);
    if (std::isnan(x)) throw DomainError("berry_esseen_K: x is NaN");
    return K_unchecked(n, alpha, x, cfg);
}

KMax find_K_max(int n, double alpha, const BoundCfg& cfg) {
    check_K_args(n, alpha, cfg);
    const double lo = n;
    const double hi = 5.0 * n * alpha / (alpha - 1.0);
    constexpr int kScan = 120;
    auto K = [&](double x) { return K_unchecked(n, alpha, x, cfg); };
    int best = 0;
    double best_val = -1.0;
    std::vector<double> xs(kScan + 1);
    for (int i = 0; i <= kScan; ++i) {
        xs[i] = lo + (hi - lo) * i / kScan;
        const double v = K(xs[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    // Golden-section search on the bracketing cells.
    double a = xs[std::max(best - 1, 0)];
    double b = xs[std::min(best + 1, kScan)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = K(c), fd = K(d);
    while (b - a > 1e-4 * n) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = K(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = K(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double v = K(x);
    if (v < best_val) return {xs[best], best_val};
    return {x, v};
}

BoundCurve bound_curve(int n, double alpha, double x_lo, double x_hi, int points, const BoundCfg& cfg, int workers) {
    check_K_args(n, alpha, cfg);
    if (points < 2 || !(x_hi > x_lo)) throw DomainError("bound_curve: need points >= 2 and x_hi > x_lo");
    BoundCurve out{n, alpha, cfg.c, std::vector<double>(points), std::vector<double>(points)};
    for (int i = 0; i < points; ++i) out.x[i] = x_lo + (x_hi - x_lo) * i / (points - 1);
    auto work = [&](int w) {
        for (int i = w; i < points; i += workers) out.K[i] = K_unchecked(n, alpha, out.x[i], cfg);
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    return out;
}

double density_bound_k2(const NormexApprox& a, double x, double c) {
    const int n = a.n();
    const int k = a.k();
    const double alpha = a.alpha();
    if (k < 2) throw DomainError("density_bound_k2: needs k >= 2 (alpha <= 2 with p = 4)");
    if (std::isnan(x)) throw DomainError("density_bound_k2: x is NaN");
    if (x <= n) return 0.0;
    const GridDensity& top = a.standard_top();
    const auto e = top.edges();
    const int m = n - k + 1;
    const double log_binom = log_gamma(n + 1.0) - log_gamma(k) - log_gamma(n - k + 2.0);
    const double y_max = x / k;
    const double u_max = std::exp(m * std::log(-std::expm1(-alpha * std::log(y_max))));

    // int_0^t P(y W <= v) dv = E[(t - y W)_+], exact for the piecewise-constant density.
    auto expected_room = [&](double y, double t) {
        double total = 0.0;
        for (std::size_t i = 0; i < top.cells(); ++i) {
            const double lo = y * e[i];
            if (lo >= t) break;
            const double hi = y * e[i + 1];
            const double cut = std::min(hi, t);
            const double d = top.cell_mass(i) / (hi - lo);
            total += d * 0.5 * ((t - lo) * (t - lo) - (t - cut) * (t - cut));
        }
        return total;
    };
    RealFn integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double one_minus = -std::expm1(std::log(u) / m);
        if (!(one_minus > 0.0)) return 0.0;
        const double y = std::pow(one_minus, -1.0 / alpha);
        if (y - 1.0 < 1e-9) return 0.0;
        const double weight = std::exp(log_binom + (k - 1) * std::log(one_minus));
        const double g2 = summand_variance(alpha, y);
        const double g = std::sqrt(g2);
        const double C = cond_third_abs_moment(alpha, y) / (g2 * g);
        return weight * C / g * expected_room(y, x - y);
    };
    QuadCfg qc;
    qc.abs_tol = 1e-10;
    qc.rel_tol = 1e-8;
    qc.max_depth = 4000;
    return c / (n - k) * integrate_adaptive(integrand, 0.0, u_max, qc).value;
}

double density_bound_k2(int n, double alpha, double x, double c) {
    return density_bound_k2(NormexApprox(n, alpha), x, c);
}

}  // namespace normex
