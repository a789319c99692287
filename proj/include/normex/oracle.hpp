#pragma once

// Reference distributions for S_n: Monte Carlo samples (sorted or streamed)
// with empirical quantiles and confidence intervals, and the exact density of
// small sums by repeated grid convolution.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "normex/numerics.hpp"

namespace normex {

/// Sorted Monte Carlo sample of S_n together with how it was produced.
struct EmpiricalDistribution {
    int n = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<double> sorted;  // ascending, size N

    std::uint64_t size() const noexcept { return sorted.size(); }
};

struct SimulateCfg {
    int workers = 1;
    /// Largest sample held in memory, in bytes of doubles.
    std::uint64_t memory_cap_bytes = std::uint64_t{1} << 30;
};

/// N draws of S_n. Worker w fills the w-th contiguous block of the sample from
/// its own stream derived from (seed, w), so the result depends on
/// (seed, workers) only. CapacityError when 8 N bytes exceed the cap.
EmpiricalDistribution simulate_sums(int n, double alpha, std::uint64_t N, std::uint64_t seed,
                                    const SimulateCfg& cfg = {});

/// Seed of the stream used by worker w.
std::uint64_t worker_stream_seed(std::uint64_t seed, int worker);

struct QuantileWithCI {
    double q;
    double point;
    double ci_low;
    double ci_high;
    double confidence;
    double density;  // estimated density of S_n at the point

    double half_width() const { return 0.5 * (ci_high - ci_low); }
};

/// Order statistic of rank ceil(N q) (1-based) with the normal-theory interval
/// point +- z sqrt(q(1-q)) / (f sqrt(N)), z the (1 + confidence)/2 normal
/// quantile and f the density at the point estimated from the ranks
/// ceil(N q) +- ceil(sqrt(N)).
QuantileWithCI empirical_quantile(const EmpiricalDistribution& e, double q, double confidence = 0.95);

/// Fraction of the sample <= x.
double empirical_cdf(const EmpiricalDistribution& e, double x);

/// Same quantiles and intervals as empirical_quantile on simulate_sums(n, alpha,
/// N, seed, workers), without holding the sample: one pass histograms the
/// sums, a second pass regenerates them and keeps only the values near the
/// needed ranks.
std::vector<QuantileWithCI> streaming_quantiles(int n, double alpha, std::uint64_t N, std::uint64_t seed,
                                                std::span<const double> qs, double confidence = 0.95,
                                                const SimulateCfg& cfg = {});

/// Binary cache, little endian: 8-byte magic "NXSUMS01", u32 version, u32
/// workers, i64 n, f64 alpha, u64 N, u64 seed, then N f64 values.
void save_empirical(const EmpiricalDistribution& e, const std::filesystem::path& path);
EmpiricalDistribution load_empirical(const std::filesystem::path& path);

inline constexpr int kExactSumMaxN = 64;

struct SumGridCfg {
    double linear_step = 0.005;
    std::size_t linear_cells = 400;
    double ratio = 1.005;
    double tail_mass = 1e-10;
};

/// Density of S_n (n <= 64) by convolving a discretised Pareto density with
/// itself. UnsupportedRangeError above the cap.
GridDensity exact_sum_pdf_grid(int n, double alpha, const SumGridCfg& cfg = {});

}  // namespace normex
