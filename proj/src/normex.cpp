#include "normex/normex.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"
#include "normex/order_stats.hpp"

namespace normex {

int select_k(double alpha, int p) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("select_k: alpha must be positive");
    if (p < 1) throw DomainError("select_k: p must be at least 1");
    // Strict inequality alpha (k + 1) > p; alpha = 2, p = 4 gives k = 2.
    int k = static_cast<int>(std::floor(p / alpha));
    if (k < 1) k = 1;
    while (k > 1 && alpha * k > p) --k;
    while (!(alpha * (k + 1) > p)) ++k;
    if (k > kMaxK) {
        std::ostringstream msg;
        msg << "select_k: alpha = " << alpha << " needs k = " << k << " for p = " << p
            << "; supported up to k = " << kMaxK << " (alpha > p / " << kMaxK + 1 << ")";
        throw UnsupportedRangeError(msg.str());
    }
    return k;
}

namespace {

// Pareto(alpha) on [1, inf) discretised with exact cell masses.
GridDensity standard_pareto_grid(double alpha, const HyGridCfg& cfg) {
    if (!(cfg.linear_step > 0.0) || !(cfg.ratio >= 1.0) || !(cfg.tail_mass > 0.0 && cfg.tail_mass < 1.0)) {
        throw DomainError("hy_convolution: invalid grid configuration");
    }
    const double end = std::pow(cfg.tail_mass, -1.0 / alpha);
    return pareto_grid(ParetoModel(alpha), make_mixed_edges(1.0, cfg.linear_step, cfg.linear_cells, cfg.ratio, end));
}

GridDensity standard_top_sum(double alpha, int terms, const HyGridCfg& cfg) {
    const GridDensity base = standard_pareto_grid(alpha, cfg);
    GridDensity acc = base;
    for (int j = 1; j < terms; ++j) {
        GridDensity next = grid_convolve(acc, base);
        // Beyond this point some cell pairs fall off the truncated inputs.
        const double complete = std::min(acc.support_end() + base.support_start(),
                                         base.support_end() + acc.support_start());
        acc = next.truncated(complete);
    }
    if (acc.mass() < cfg.min_mass) {
        std::ostringstream msg;
        msg << "hy_convolution: grid holds mass " << acc.mass() << " < " << cfg.min_mass
            << "; lower tail_mass to extend the grid";
        throw ResolutionError(msg.str(), 1.0 - acc.mass());
    }
    return acc;
}

}  // namespace

GridDensity hy_convolution(double y, double alpha, int k, const HyGridCfg& cfg) {
    if (k < 2) throw DomainError("hy_convolution: needs k >= 2");
    if (!(y >= 1.0)) throw DomainError("hy_convolution: y must be at least 1");
    if (!(alpha > 0.0)) throw DomainError("hy_convolution: alpha must be positive");
    // h_y is the law of y X with X ~ Pareto(alpha), so h_y^{(k-1)*} is the
    // standard convolution rescaled by y.
    const GridDensity g = standard_top_sum(alpha, k - 1, cfg);
    return y == 1.0 ? g : g.scaled(y);
}

NormexApprox::NormexApprox(int n, double alpha, const NormexCfg& cfg) : n_(n), alpha_(alpha), cfg_(cfg) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("NormexApprox: alpha must be positive");
    k_ = cfg.k ? *cfg.k : select_k(alpha, cfg.p);
    if (k_ < 1 || k_ > kMaxK) throw UnsupportedRangeError("NormexApprox: k outside [1, 7]");
    if (n <= k_) {
        std::ostringstream msg;
        msg << "NormexApprox: n = " << n << " must exceed k = " << k_;
        throw DomainError(msg.str());
    }
    if (k_ >= 2) top_ = standard_top_sum(alpha, k_ - 1, cfg.grid);
}

namespace {

double psi(double t) { return t * normal_cdf(t) + normal_pdf(t); }

// P(N >= 0, N + U <= t) with N ~ N(m1, sigma^2) and U = y W, W on `top`.
double smoothed_top(const GridDensity& top, double y, double t, double m1, double sigma) {
    const auto e = top.edges();
    const double u_end = t;  // cells are clipped at U = t
    if (y * e[0] >= u_end) return 0.0;
    const double s = t - m1;
    const double c = normal_cdf(-m1 / sigma);
    double total = 0.0;
    double psi_lo = psi((s - y * e[0]) / sigma);
    for (std::size_t i = 0; i < top.cells(); ++i) {
        const double a = y * e[i];
        if (a >= u_end) break;
        const double b_full = y * e[i + 1];
        const double b = std::min(b_full, u_end);
        const double psi_hi = psi((s - b) / sigma);
        const double integral = sigma * (psi_lo - psi_hi) - c * (b - a);
        total += top.cell_mass(i) / (b_full - a) * integral;
        psi_lo = psi_hi;
    }
    return total;
}

}  // namespace

double normex_cdf(const NormexApprox& a, double x) {
    const int n = a.n();
    const int k = a.k();
    const double alpha = a.alpha();
    if (std::isnan(x)) throw DomainError("normex_cdf: x is NaN");
    if (x <= n) return 0.0;
    if (std::isinf(x)) return 1.0;

    const int m = n - k + 1;  // index of the conditioning order statistic
    const double log_binom = log_gamma(n + 1.0) - log_gamma(k) - log_gamma(n - k + 2.0);
    // Largest useful y: U >= (k - 1) y must fit below x - y.
    const double y_max = x / k;
    const double u_max = std::exp(m * std::log(-std::expm1(-alpha * std::log(y_max))));
    const GridDensity& top = a.standard_top();

    RealFn integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double one_minus = -std::expm1(std::log(u) / m);  // 1 - F(y)
        if (!(one_minus > 0.0)) return 0.0;
        const double y = std::pow(one_minus, -1.0 / alpha);
        const double t = x - y;
        double weight = 1.0;
        if (k > 1) weight = std::exp(log_binom + (k - 1) * std::log(one_minus));
        if (y - 1.0 < 1e-10) {
            // Degenerate conditional law: every trimmed summand equals 1.
            const double rest = t - (n - k);
            if (k == 1) return rest >= 0.0 ? weight : 0.0;
            return weight * top.cdf(rest / y);
        }
        const double m1 = (n - k) * summand_mean(alpha, y);
        const double sigma = std::sqrt((n - k) * summand_variance(alpha, y));
        if (k == 1) return weight * (normal_cdf((t - m1) / sigma) - normal_cdf(-m1 / sigma));
        return weight * smoothed_top(top, y, t, m1, sigma);
    };

    QuadCfg qc;
    qc.abs_tol = a.cfg().abs_tol;
    qc.rel_tol = a.cfg().rel_tol;
    qc.max_depth = 4000;
    const double g = integrate_adaptive(integrand, 0.0, u_max, qc).value;
    return std::min(1.0, std::max(0.0, g));
}

double normex_quantile(const NormexApprox& a, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("normex_quantile: q outside (0,1)");
    const double n = a.n();
    const double alpha = a.alpha();
    const double center = alpha > 1.0 ? n * alpha / (alpha - 1.0) : n;
    const double hi = center + 20.0 * std::pow(n, 1.0 / alpha) * std::pow(1.0 - q, -1.0 / alpha);
    RootCfg rc;
    rc.x_tol = a.cfg().quantile_x_tol * n;
    rc.expand_lo = false;
    rc.max_expansions = 80;
    return find_root_bracketed([&](double x) { return normex_cdf(a, x) - q; }, n, hi, rc);
}

}  // namespace normex
