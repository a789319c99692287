#pragma once

// Shared numerical kernels: adaptive Gauss-Kronrod quadrature, bracketed
// root finding and convolution of densities discretised on cell grids.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace normex {

using RealFn = std::function<double(double)>;

/// Change of variables applied before integrating.
enum class QuadTransform {
    kIdentity,
    /// t = 1 - y^(-alpha); flattens Pareto-type integrands. Needs 1 <= a.
    kParetoFlatten,
    /// Smooth-step map whose Jacobian vanishes at both ends; absorbs
    /// integrable algebraic endpoint singularities such as u^(-1/2).
    kEndpointSmooth,
};

struct QuadCfg {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 2000;  // maximum number of interval subdivisions
    QuadTransform transform = QuadTransform::kIdentity;
    double alpha = 1.0;  // tail index for kParetoFlatten
    /// Throw NumericalError when the tolerance is not met. When false the
    /// partial result is returned with converged == false.
    bool throw_on_failure = true;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int evaluations = 0;
    bool converged = true;
};

/// Integrate f over [a, b]. b may be +infinity: the identity transform then
/// maps [a, inf) onto [0, 1) with y = a + t/(1-t); kParetoFlatten maps it onto
/// [F(a), 1).
QuadResult integrate_adaptive(const RealFn& f, double a, double b, const QuadCfg& cfg = {});

/// Fixed-order Gauss-Legendre rule on [a, b] (points <= 64). Meant for short
/// intervals where the integrand is smooth.
double integrate_gauss_legendre(const RealFn& f, double a, double b, int points = 32);

struct RootCfg {
    double x_tol = 1e-12;
    double f_tol = 0.0;
    int max_iter = 200;
    double expansion_factor = 1.6;
    int max_expansions = 60;
    bool expand_lo = true;
    bool expand_hi = true;
};

/// Brent-type root finder (bisection / secant / inverse quadratic).
/// Expands [lo, hi] geometrically until f changes sign; throws NumericalError
/// when no sign change is found within the expansion budget.
double find_root_bracketed(const RealFn& f, double lo, double hi, const RootCfg& cfg = {});

/// Cell edges: `linear_cells` cells of width `linear_step` starting at `start`,
/// then geometrically growing cells (ratio `ratio` > 1) until `end` is covered.
std::vector<double> make_mixed_edges(double start, double linear_step, std::size_t linear_cells,
                                     double ratio, double end);

/// A probability density discretised on contiguous cells, constant within
/// each cell. Truncated tails show up as mass() < 1.
class GridDensity {
public:
    GridDensity() = default;
    /// edges.size() == density.size() + 1, edges strictly increasing, density >= 0.
    GridDensity(std::vector<double> edges, std::vector<double> density);

    /// Uniform grid: cell i is [start + i*step, start + (i+1)*step).
    static GridDensity uniform(double start, double step, std::vector<double> density);
    /// Build from per-cell probability masses.
    static GridDensity from_masses(std::vector<double> edges, std::span<const double> masses);

    std::size_t cells() const noexcept { return density_.size(); }
    std::span<const double> edges() const noexcept { return edges_; }
    std::span<const double> density() const noexcept { return density_; }
    double support_start() const { return edges_.front(); }
    double support_end() const { return edges_.back(); }
    double width(std::size_t i) const { return edges_[i + 1] - edges_[i]; }
    double cell_mass(std::size_t i) const { return density_[i] * width(i); }
    /// True when every cell has the same width (to relative 1e-9).
    bool is_uniform() const;
    /// Width of the first cell.
    double step() const { return width(0); }
    /// Largest ratio between consecutive cell widths.
    double max_width_ratio() const;

    double mass() const;
    double mean() const;
    double pdf(double x) const;
    /// Integral of the density over (-inf, x].
    double cdf(double x) const;
    /// Smallest x with cdf(x) >= p * mass() (linear within the cell).
    double quantile(double p) const;

    /// Same shape with edges multiplied by `scale` (> 0) and density divided by it.
    GridDensity scaled(double scale) const;
    /// Drop every cell whose upper edge exceeds `end`.
    GridDensity truncated(double end) const;

private:
    std::vector<double> edges_;
    std::vector<double> density_;
    std::vector<double> cum_;  // cum_[i] = mass of cells [0, i)
    void rebuild_cumulative();
};

struct ConvolveCfg {
    /// Allow the output to live on a grid different from both inputs.
    bool allow_resample = true;
    /// Skip cell pairs whose joint mass is below this value.
    double mass_floor = 0.0;
};

/// Density of the sum of two independent variables. Each pair of cells
/// contributes the exact (trapezoidal) law of the sum of two uniforms, so
/// mass(a*b) == mass(a)*mass(b) up to rounding and the support starts at
/// a.start + b.start. Two uniform grids with the same step convolve onto a
/// uniform grid with that step; anything else needs allow_resample.
GridDensity grid_convolve(const GridDensity& a, const GridDensity& b, const ConvolveCfg& cfg = {});

}  // namespace normex
