#include "normex/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "normex/errors.hpp"

namespace normex {
namespace {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const RealFn& g, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = g(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = g(center - dx);
        const double f2 = g(center + dx);
        kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

// Integrate g over the finite interval [a, b] by global adaptive bisection.
QuadResult adaptive_finite(const RealFn& g, double a, double b, const QuadCfg& cfg) {
    QuadResult out;
    std::priority_queue<Segment> heap;
    Segment first = gauss_kronrod(g, a, b);
    out.evaluations = 15;
    heap.push(first);
    double total = first.value;
    double total_err = first.error;
    int splits = 0;
    auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
    while (total_err > tolerance()) {
        if (splits >= cfg.max_depth) {
            out.converged = false;
            break;
        }
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        // Stop refining once the interval cannot be split in floating point.
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 64 * std::numeric_limits<double>::epsilon() *
                                      std::max(std::abs(worst.a), std::abs(worst.b))) {
            out.converged = false;
            break;
        }
        heap.pop();
        Segment left = gauss_kronrod(g, worst.a, mid);
        Segment right = gauss_kronrod(g, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }
    // Re-sum to shed the drift accumulated by incremental updates.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = total_err;
    if (!std::isfinite(total)) out.converged = false;
    return out;
}

}  // namespace

QuadResult integrate_adaptive(const RealFn& f, double a, double b, const QuadCfg& cfg) {
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0)) {
        throw DomainError("integrate_adaptive: tolerances must be positive");
    }
    if (std::isnan(a) || std::isnan(b) || !(a < b)) {
        if (a == b) return {};
        throw DomainError("integrate_adaptive: need a < b");
    }
    if (std::isinf(a)) throw DomainError("integrate_adaptive: lower limit must be finite");

    QuadResult r;
    switch (cfg.transform) {
        case QuadTransform::kIdentity:
            if (std::isinf(b)) {
                RealFn g = [&](double t) {
                    const double s = 1.0 - t;
                    return f(a + t / s) / (s * s);
                };
                r = adaptive_finite(g, 0.0, 1.0, cfg);
            } else {
                r = adaptive_finite(f, a, b, cfg);
            }
            break;
        case QuadTransform::kParetoFlatten: {
            if (!(a >= 1.0) || !(cfg.alpha > 0.0)) {
                throw DomainError("integrate_adaptive: Pareto flattening needs a >= 1 and alpha > 0");
            }
            // s = 1 - t = y^(-alpha), y = s^(-1/alpha), |dy/ds| = s^(-1/alpha - 1) / alpha.
            const double inv = 1.0 / cfg.alpha;
            const double s_lo = std::isinf(b) ? 0.0 : std::pow(b, -cfg.alpha);
            const double s_hi = std::pow(a, -cfg.alpha);
            RealFn g = [&](double s) {
                const double y = std::pow(s, -inv);
                return f(y) * inv * y / s;
            };
            r = adaptive_finite(g, s_lo, s_hi, cfg);
            break;
        }
        case QuadTransform::kEndpointSmooth: {
            if (std::isinf(b)) {
                throw DomainError("integrate_adaptive: endpoint smoothing needs a finite interval");
            }
            const double len = b - a;
            RealFn g = [&](double t) {
                // Measure from the nearer end so x keeps its digits there.
                const double x = t < 0.5 ? a + len * t * t * (3.0 - 2.0 * t)
                                         : b - len * (1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t);
                // Rounded onto an endpoint: the weight's zero wins for any
                // singularity milder than |x - c|^(-1/2).
                if (x <= a || x >= b) return 0.0;
                return f(x) * len * 6.0 * t * (1.0 - t);
            };
            r = adaptive_finite(g, 0.0, 1.0, cfg);
            break;
        }
    }
    if (!r.converged && cfg.throw_on_failure) {
        std::ostringstream msg;
        msg << "integrate_adaptive: no convergence on [" << a << ", " << b << "], value " << r.value
            << ", achieved error " << r.error;
        throw NumericalError(msg.str(), r.error);
    }
    return r;
}

double find_root_bracketed(const RealFn& f, double lo, double hi, const RootCfg& cfg) {
    if (!(lo < hi)) throw DomainError("find_root_bracketed: need lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    int expansions = 0;
    while (std::signbit(flo) == std::signbit(fhi) && flo != 0.0 && fhi != 0.0) {
        if (expansions++ >= cfg.max_expansions || (!cfg.expand_lo && !cfg.expand_hi)) {
            std::ostringstream msg;
            msg << "find_root_bracketed: no sign change on [" << lo << ", " << hi << "] (f = " << flo
                << ", " << fhi << ")";
            throw NumericalError(msg.str(), hi - lo);
        }
        const double w = hi - lo;
        const bool grow_hi =
            cfg.expand_hi && (!cfg.expand_lo || std::abs(fhi) <= std::abs(flo));
        if (grow_hi) {
            lo = hi;
            flo = fhi;
            hi += cfg.expansion_factor * w;
            fhi = f(hi);
        } else {
            hi = lo;
            fhi = flo;
            lo -= cfg.expansion_factor * w;
            flo = f(lo);
        }
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    // Brent's method.
    double a = lo, b = hi, fa = flo, fb = fhi;
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * cfg.x_tol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0 || std::abs(fb) <= cfg.f_tol) return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    std::ostringstream msg;
    msg << "find_root_bracketed: iteration budget exhausted near " << b;
    throw NumericalError(msg.str(), std::abs(c - b));
}

std::vector<double> make_mixed_edges(double start, double linear_step, std::size_t linear_cells,
                                     double ratio, double end) {
    if (!(linear_step > 0.0) || !(end > start)) {
        throw DomainError("make_mixed_edges: need linear_step > 0 and end > start");
    }
    std::vector<double> edges;
    edges.reserve(linear_cells + 1);
    edges.push_back(start);
    for (std::size_t i = 1; i <= linear_cells && edges.back() < end; ++i) {
        edges.push_back(start + static_cast<double>(i) * linear_step);
    }
    double w = linear_step;
    const double r = std::max(ratio, 1.0);
    while (edges.back() < end) {
        w *= r;
        edges.push_back(edges.back() + w);
    }
    return edges;
}

GridDensity::GridDensity(std::vector<double> edges, std::vector<double> density)
    : edges_(std::move(edges)), density_(std::move(density)) {
    if (edges_.size() != density_.size() + 1 || density_.empty()) {
        throw DomainError("GridDensity: need edges.size() == density.size() + 1 >= 2");
    }
    for (std::size_t i = 0; i < density_.size(); ++i) {
        if (!(edges_[i + 1] > edges_[i])) throw DomainError("GridDensity: edges must increase");
        if (!(density_[i] >= 0.0)) throw DomainError("GridDensity: density must be nonnegative");
    }
    rebuild_cumulative();
}

GridDensity GridDensity::uniform(double start, double step, std::vector<double> density) {
    std::vector<double> edges(density.size() + 1);
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = start + static_cast<double>(i) * step;
    return GridDensity(std::move(edges), std::move(density));
}

GridDensity GridDensity::from_masses(std::vector<double> edges, std::span<const double> masses) {
    if (edges.size() != masses.size() + 1) {
        throw DomainError("GridDensity::from_masses: need edges.size() == masses.size() + 1");
    }
    std::vector<double> density(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) density[i] = masses[i] / (edges[i + 1] - edges[i]);
    return GridDensity(std::move(edges), std::move(density));
}

void GridDensity::rebuild_cumulative() {
    cum_.assign(density_.size() + 1, 0.0);
    for (std::size_t i = 0; i < density_.size(); ++i) cum_[i + 1] = cum_[i] + cell_mass(i);
}

bool GridDensity::is_uniform() const {
    const double w0 = width(0);
    for (std::size_t i = 1; i < cells(); ++i) {
        if (std::abs(width(i) - w0) > 1e-9 * w0) return false;
    }
    return true;
}

double GridDensity::max_width_ratio() const {
    double r = 1.0;
    for (std::size_t i = 1; i < cells(); ++i) r = std::max(r, width(i) / width(i - 1));
    return r;
}

double GridDensity::mass() const { return cum_.back(); }

double GridDensity::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < cells(); ++i) m += cell_mass(i) * 0.5 * (edges_[i] + edges_[i + 1]);
    return m / mass();
}

double GridDensity::pdf(double x) const {
    if (x < edges_.front() || x >= edges_.back()) return 0.0;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    return density_[static_cast<std::size_t>(it - edges_.begin()) - 1];
}

double GridDensity::cdf(double x) const {
    if (x <= edges_.front()) return 0.0;
    if (x >= edges_.back()) return cum_.back();
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - edges_.begin()) - 1;
    return cum_[i] + density_[i] * (x - edges_[i]);
}

double GridDensity::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("GridDensity::quantile: p outside [0,1]");
    const double target = p * mass();
    const auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), target);
    if (it == cum_.end()) return edges_.back();
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    const double m = cell_mass(i);
    if (m <= 0.0) return edges_[i];
    return edges_[i] + (target - cum_[i]) / m * width(i);
}

GridDensity GridDensity::scaled(double scale) const {
    if (!(scale > 0.0)) throw DomainError("GridDensity::scaled: scale must be positive");
    std::vector<double> e(edges_.size());
    std::vector<double> d(density_.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = edges_[i] * scale;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = density_[i] / scale;
    return GridDensity(std::move(e), std::move(d));
}

GridDensity GridDensity::truncated(double end) const {
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), end);
    const std::size_t keep_edges = static_cast<std::size_t>(it - edges_.begin());
    if (keep_edges < 2) throw DomainError("GridDensity::truncated: nothing left below end");
    std::vector<double> e(edges_.begin(), edges_.begin() + static_cast<std::ptrdiff_t>(keep_edges));
    std::vector<double> d(density_.begin(), density_.begin() + static_cast<std::ptrdiff_t>(keep_edges - 1));
    return GridDensity(std::move(e), std::move(d));
}

namespace {

// CDF of U1 + U2 - lo where U1 ~ U[0, w1], U2 ~ U[0, w2].
double trapezoid_cdf(double s, double w1, double w2) {
    if (s <= 0.0) return 0.0;
    const double total = w1 + w2;
    if (s >= total) return 1.0;
    const double wl = std::min(w1, w2);
    const double wh = std::max(w1, w2);
    if (s <= wl) return s * s / (2.0 * w1 * w2);
    if (s <= wh) return (2.0 * s - wl) / (2.0 * wh);
    const double r = total - s;
    return 1.0 - r * r / (2.0 * w1 * w2);
}

// Width of the leading run of equal-width cells.
double linear_extent(const GridDensity& g) {
    const double w0 = g.width(0);
    std::size_t i = 1;
    while (i < g.cells() && std::abs(g.width(i) - w0) <= 1e-9 * w0) ++i;
    return static_cast<double>(i) * w0;
}

}  // namespace

GridDensity grid_convolve(const GridDensity& a, const GridDensity& b, const ConvolveCfg& cfg) {
    if (a.cells() == 0 || b.cells() == 0) throw DomainError("grid_convolve: empty grid");
    const double start = a.support_start() + b.support_start();
    const double end = a.support_end() + b.support_end();
    std::vector<double> out_edges;
    const bool same_uniform = a.is_uniform() && b.is_uniform() &&
                              std::abs(a.step() - b.step()) <= 1e-9 * std::max(a.step(), b.step());
    if (same_uniform) {
        const std::size_t n_out = a.cells() + b.cells();
        out_edges.resize(n_out + 1);
        for (std::size_t i = 0; i <= n_out; ++i) out_edges[i] = start + static_cast<double>(i) * a.step();
    } else {
        if (!cfg.allow_resample) {
            throw DomainError("grid_convolve: grids have different cell layouts and resampling is disabled");
        }
        const double step = std::min(a.step(), b.step());
        const double lin = std::max(linear_extent(a), linear_extent(b));
        const auto lin_cells = static_cast<std::size_t>(std::ceil(lin / step - 1e-9));
        const double ratio = std::min(a.max_width_ratio(), b.max_width_ratio());
        out_edges = make_mixed_edges(start, step, lin_cells, ratio > 1.0 + 1e-12 ? ratio : 1.0, end);
    }

    std::vector<double> out_mass(out_edges.size() - 1, 0.0);
    const auto ea = a.edges();
    const auto eb = b.edges();
    for (std::size_t i = 0; i < a.cells(); ++i) {
        const double ma = a.cell_mass(i);
        if (ma <= 0.0) continue;
        const double wa = a.width(i);
        // Output cell containing the lower end of the current pair; lower ends
        // increase with j so the search resumes where it left off.
        std::size_t l = static_cast<std::size_t>(
            std::upper_bound(out_edges.begin(), out_edges.end(), ea[i] + eb[0]) - out_edges.begin());
        l = (l == 0) ? 0 : l - 1;
        for (std::size_t j = 0; j < b.cells(); ++j) {
            const double pm = ma * b.cell_mass(j);
            if (pm <= cfg.mass_floor) continue;
            const double wb = b.width(j);
            const double lo = ea[i] + eb[j];
            const double hi = lo + wa + wb;
            while (l + 1 < out_edges.size() - 1 && out_edges[l + 1] <= lo) ++l;
            double prev = 0.0;
            for (std::size_t c = l; c < out_mass.size(); ++c) {
                const double upper = out_edges[c + 1];
                const bool done = upper >= hi || c + 1 == out_mass.size();
                const double g = done ? 1.0 : trapezoid_cdf(upper - lo, wa, wb);
                out_mass[c] += pm * (g - prev);
                prev = g;
                if (done) break;
            }
        }
    }
    return GridDensity::from_masses(std::move(out_edges), out_mass);
}

namespace {

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

GaussRule build_gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

const GaussRule& gauss_rule(int n) {
    static const std::vector<GaussRule> table = [] {
        std::vector<GaussRule> t(65);
        for (int k = 1; k <= 64; ++k) t[k] = build_gauss_legendre(k);
        return t;
    }();
    return table[n];
}

}  // namespace

double integrate_gauss_legendre(const RealFn& f, double a, double b, int points) {
    if (points < 1 || points > 64) throw DomainError("integrate_gauss_legendre: points must be in [1, 64]");
    const GaussRule& r = gauss_rule(points);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int i = 0; i < points; ++i) sum += r.w[i] * f(mid + half * r.x[i]);
    return sum * half;
}

}  // namespace normex
