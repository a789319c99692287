#pragma once

// Normex: the sum S_n is split into its k largest terms, handled exactly, and
// the trimmed remainder, approximated by a normal law conditional on the
// k-th largest order statistic.

#include <optional>

#include "normex/numerics.hpp"

namespace normex {

/// Largest k supported (moments up to order p need alpha (k + 1) > p).
inline constexpr int kMaxK = 7;

/// Smallest k with alpha (k + 1) > p. UnsupportedRangeError when k > kMaxK.
int select_k(double alpha, int p = 4);

/// Grid used for the shifted-Pareto convolutions.
struct HyGridCfg {
    double linear_step = 0.005;       // cell width near the support start (y = 1 units)
    std::size_t linear_cells = 200;
    double ratio = 1.01;              // geometric growth of the cells beyond the linear part
    double tail_mass = 1e-10;         // the grid ends where the Pareto tail drops below this
    double min_mass = 1.0 - 1e-6;     // ResolutionError below this captured mass
};

/// Density of the sum of k - 1 independent Pareto variables shifted to start at y
/// (density alpha y^alpha / x^(alpha + 1) on [y, inf)). Support starts at (k-1) y.
GridDensity hy_convolution(double y, double alpha, int k, const HyGridCfg& cfg = {});

struct NormexCfg {
    int p = 4;
    std::optional<int> k;  // overrides select_k(alpha, p)
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    HyGridCfg grid;
    double quantile_x_tol = 1e-6;  // relative to n
};

/// Precomputed state for G_{n,alpha,k}. Immutable once built; safe to share.
class NormexApprox {
public:
    NormexApprox(int n, double alpha, const NormexCfg& cfg = {});

    int n() const noexcept { return n_; }
    double alpha() const noexcept { return alpha_; }
    int k() const noexcept { return k_; }
    int p() const noexcept { return cfg_.p; }
    const NormexCfg& cfg() const noexcept { return cfg_; }
    /// Law of the sum of the k - 1 largest terms divided by X_(n-k+1);
    /// empty when k == 1.
    const GridDensity& standard_top() const noexcept { return top_; }

private:
    int n_;
    double alpha_;
    int k_;
    NormexCfg cfg_;
    GridDensity top_;
};

/// G_{n,alpha,k}(x). Zero for x <= n since S_n >= n.
double normex_cdf(const NormexApprox& a, double x);

/// Inverse of normex_cdf by bracketed root finding.
double normex_quantile(const NormexApprox& a, double q);

}  // namespace normex
