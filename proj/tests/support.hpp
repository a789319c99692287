#pragma once

// Small statistical helpers shared by the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing_support {

/// sup |F_emp - F| for an ascending sample.
inline double ks_one_sample(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov statistic; both inputs are sorted in place.
inline double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

/// Critical value of the (asymptotic) KS statistic at the 1% level.
inline double ks_crit_1pct(double n, double m = 0.0) {
    const double eff = m > 0.0 ? n * m / (n + m) : n;
    return 1.628 / std::sqrt(eff);
}

/// Pareto draw by inversion, independent of the library sampler.
inline double pareto_draw(std::mt19937_64& g, double alpha) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::pow(1.0 - u(g), -1.0 / alpha);
}

}  // namespace testing_support
