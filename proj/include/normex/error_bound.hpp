#pragma once

// Berry-Esseen type bounds on |P(S_n <= x) - G_{n,alpha,k}(x)|: the
// non-uniform bound K(x) for k = 1 and a sup-density bound for k >= 2.

#include <span>
#include <vector>

namespace normex {

class NormexApprox;

struct BoundCfg {
    double c = 0.4693;
    /// Drop the (1 + |z|)^3 denominator: c C(y) / sqrt(n - 1) inside the integral.
    bool uniform_form = false;
    /// Accept 3 < alpha <= 4 (the bound is derived for 2 < alpha <= 3).
    bool allow_extrapolation = false;
    double abs_tol = 1e-11;
    double rel_tol = 1e-8;
};

/// K(x) = c / sqrt(n-1) int_1^x C(y) / (1 + |z(y)|)^3 f_(n)(y) dy with
/// z(y) = (x - y - (n-1) mu_y) / (sqrt(n-1) gamma_y).
double berry_esseen_K(int n, double alpha, double x, const BoundCfg& cfg = {});

struct KMax {
    double x_max;
    double K_max;
};

/// Maximiser of K over [n, 5 n alpha / (alpha - 1)]: a coarse grid scan
/// refined by golden-section search.
KMax find_K_max(int n, double alpha, const BoundCfg& cfg = {});

struct BoundCurve {
    int n;
    double alpha;
    double c;
    std::vector<double> x;
    std::vector<double> K;
};

/// K on `points` equally spaced abscissae in [x_lo, x_hi].
BoundCurve bound_curve(int n, double alpha, double x_lo, double x_hi, int points, const BoundCfg& cfg = {},
                       int workers = 1);

inline constexpr double kDensityBoundC = 0.4014;

/// Bound for k >= 2:
///   c / (n - k) int f_(n-k+1)(y) C(y) / gamma_y int_0^{x-y} P(U_y <= v) dv dy
/// with U_y the sum of the k - 1 largest terms given X_(n-k+1) = y.
/// Zero for x <= n. DomainError when the selected k is 1.
double density_bound_k2(const NormexApprox& a, double x, double c = kDensityBoundC);
double density_bound_k2(int n, double alpha, double x, double c = kDensityBoundC);

}  // namespace normex
