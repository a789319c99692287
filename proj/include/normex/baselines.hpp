#pragma once

// Competing quantile approximations for Pareto sums: stable (GCLT), normal
// (CLT), maximum (EVT), the Zaliapin et al. split, and the Edgeworth
// correction to the normal approximation.

#include <optional>

namespace normex {

struct GcltConstants {
    double b_n;                 // centering
    double C_alpha;             // stable scaling; unused at alpha = 2
    std::optional<double> d_n;  // normal scaling at alpha = 2 only
};

/// Centering and scaling of the generalised CLT, 0 < alpha <= 2.
GcltConstants gclt_constants(int n, double alpha);

/// Centering b_n: 0 below 1, n (log n + 1 - Euler - log(2/pi)) at 1, n alpha/(alpha-1) above 1.
double centering_b_n(int n, double alpha);

/// inf{x : 2 n log x / x^2 <= 1}.
double gclt_d_n(int n);

/// z^(1): n^(1/alpha) C_alpha G_alpha^{-1}(q) + b_n for alpha < 2;
/// d_n Phi^{-1}(q) + 2n at alpha = 2.
double gclt_quantile(int n, double alpha, double q);

/// Which reading of the tail shortcut z^(1bis) to use.
enum class TailForm {
    kCorrected,  // n^(1/alpha) (1-q)^(-1/alpha) + b_n
    kPrinted,    // n^(1/alpha) q^(-1/alpha) + b_n, the literal reading
};

/// z^(1bis), defined for 1/2 < alpha < 2 and q > 0.95.
double gclt_tail_quantile(int n, double alpha, double q, TailForm form = TailForm::kCorrected);

/// z^(2): normal approximation with the exact mean and variance; alpha > 2.
double clt_quantile(int n, double alpha, double q);

/// z^(3): n^(1/alpha) (log(1/q))^(-1/alpha) + b_n, b_n = n alpha/(alpha-1) for alpha > 1.
double max_evt_quantile(int n, double alpha, double q);

struct ZaliapinMoments {
    double m1;
    double m2;
    double sigma2;
};

/// Mean and second moment of the sum of the n - 2 smallest order statistics.
/// Needs 2/3 < alpha < 2 and n >= 3.
ZaliapinMoments zaliapin_moments(int n, double alpha);

/// CDF of X_(n-1) + X_(n).
double top_two_sum_cdf(int n, double alpha, double x);
double top_two_sum_quantile(int n, double alpha, double q);

/// z^(4): sigma Phi^{-1}(q) + m1 + T^{-1}(q).
double zaliapin_quantile(int n, double alpha, double q);

// Probabilists' Hermite polynomials used by the Edgeworth terms.
double hermite_h2(double x);
double hermite_h3(double x);
double hermite_h5(double x);

double edgeworth_q1(double alpha, double x);  // alpha > 3
double edgeworth_q2(double alpha, double x);  // alpha > 4

/// Q1(x)/sqrt(n) + Q2(x)/n, the second term only when alpha > 4;
/// UndefinedMomentError for alpha <= 3.
double edgeworth_correction(int n, double alpha, double x);

}  // namespace normex
