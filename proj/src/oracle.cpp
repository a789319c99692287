#include "normex/oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "normex/dist_core.hpp"
#include "normex/errors.hpp"

namespace normex {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void check_sim_args(int n, double alpha, std::uint64_t N, int workers) {
    if (n < 1) throw DomainError("simulate_sums: n must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("simulate_sums: alpha must be positive");
    if (N < 1) throw DomainError("simulate_sums: N must be at least 1");
    if (workers < 1) throw DomainError("simulate_sums: workers must be at least 1");
}

// Draws S_n for sample positions [begin, end) of worker w and hands each to `sink`.
template <typename Sink>
void generate_block(int n, double alpha, std::uint64_t seed, int w, std::uint64_t count, Sink&& sink) {
    const std::uint64_t s = worker_stream_seed(seed, w);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(w)};
    std::mt19937_64 gen(seq);
    const double inv_alpha = 1.0 / alpha;
    for (std::uint64_t i = 0; i < count; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            // U in (0, 1] from the top 53 bits; X = U^(-1/alpha).
            const double u = static_cast<double>((gen() >> 11) + 1) * 0x1p-53;
            sum += std::exp(-std::log(u) * inv_alpha);
        }
        sink(sum);
    }
}

std::uint64_t block_begin(std::uint64_t N, int workers, int w) {
    return N / workers * w + std::min<std::uint64_t>(w, N % workers);
}

template <typename PerWorker>
void run_workers(int workers, PerWorker&& body) {
    if (workers == 1) {
        body(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back([&body, w] { body(w); });
    for (auto& t : pool) t.join();
}

struct RankPlan {
    std::uint64_t point, lo, hi;  // 1-based ranks
};

RankPlan plan_ranks(std::uint64_t N, double q) {
    auto r = static_cast<std::uint64_t>(std::ceil(static_cast<double>(N) * q));
    r = std::clamp<std::uint64_t>(r, 1, N);
    const auto d = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(N))));
    const std::uint64_t lo = r > d ? r - d : 1;
    const std::uint64_t hi = std::min(N, r + d);
    return {r, lo, hi};
}

QuantileWithCI assemble(double q, double confidence, std::uint64_t N, const RankPlan& p, double x_point,
                        double x_lo, double x_hi) {
    QuantileWithCI out{q, x_point, x_point, x_point, confidence, INFINITY};
    const double span = x_hi - x_lo;
    if (p.hi > p.lo && span > 0.0) {
        out.density = static_cast<double>(p.hi - p.lo) / static_cast<double>(N) / span;
        const double z = normal_quantile(0.5 * (1.0 + confidence));
        const double hw = z * std::sqrt(q * (1.0 - q)) / (out.density * std::sqrt(static_cast<double>(N)));
        out.ci_low = x_point - hw;
        out.ci_high = x_point + hw;
    }
    return out;
}

void check_q(double q, double confidence) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("empirical_quantile: q outside (0,1)");
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("empirical_quantile: confidence outside (0,1)");
}

}  // namespace

std::uint64_t worker_stream_seed(std::uint64_t seed, int worker) {
    std::uint64_t state = seed;
    std::uint64_t out = splitmix64(state);
    for (int i = 0; i < worker; ++i) out = splitmix64(state);
    return out;
}

EmpiricalDistribution simulate_sums(int n, double alpha, std::uint64_t N, std::uint64_t seed,
                                    const SimulateCfg& cfg) {
    check_sim_args(n, alpha, N, cfg.workers);
    if (N > cfg.memory_cap_bytes / sizeof(double)) {
        std::ostringstream msg;
        msg << "simulate_sums: " << N << " samples need " << N * sizeof(double) << " bytes, above the cap of "
            << cfg.memory_cap_bytes << "; use streaming quantiles instead";
        throw CapacityError(msg.str());
    }
    EmpiricalDistribution e;
    e.n = n;
    e.alpha = alpha;
    e.seed = seed;
    e.workers = cfg.workers;
    e.sorted.resize(N);
    run_workers(cfg.workers, [&](int w) {
        const std::uint64_t b = block_begin(N, cfg.workers, w);
        const std::uint64_t c = block_begin(N, cfg.workers, w + 1) - b;
        double* out = e.sorted.data() + b;
        generate_block(n, alpha, seed, w, c, [&out](double s) { *out++ = s; });
    });
    std::sort(e.sorted.begin(), e.sorted.end());
    return e;
}

QuantileWithCI empirical_quantile(const EmpiricalDistribution& e, double q, double confidence) {
    check_q(q, confidence);
    if (e.sorted.empty()) throw DomainError("empirical_quantile: empty sample");
    const std::uint64_t N = e.size();
    const RankPlan p = plan_ranks(N, q);
    return assemble(q, confidence, N, p, e.sorted[p.point - 1], e.sorted[p.lo - 1], e.sorted[p.hi - 1]);
}

double empirical_cdf(const EmpiricalDistribution& e, double x) {
    if (e.sorted.empty()) throw DomainError("empirical_cdf: empty sample");
    const auto it = std::upper_bound(e.sorted.begin(), e.sorted.end(), x);
    return static_cast<double>(it - e.sorted.begin()) / static_cast<double>(e.size());
}

namespace {

// Histogram on t = log(s / n) in [0, kBinSpan) with a final overflow bin.
constexpr double kBinWidth = 2e-4;
constexpr double kBinSpan = 60.0;
constexpr std::size_t kBins = static_cast<std::size_t>(kBinSpan / kBinWidth) + 1;

std::size_t bin_of(double s, double n) {
    const double t = std::log(s / n) / kBinWidth;
    if (!(t >= 0.0)) return 0;
    if (t >= static_cast<double>(kBins - 1)) return kBins - 1;
    return static_cast<std::size_t>(t);
}

}  // namespace

std::vector<QuantileWithCI> streaming_quantiles(int n, double alpha, std::uint64_t N, std::uint64_t seed,
                                                std::span<const double> qs, double confidence,
                                                const SimulateCfg& cfg) {
    check_sim_args(n, alpha, N, cfg.workers);
    for (double q : qs) check_q(q, confidence);
    const int W = cfg.workers;
    const double dn = n;

    // Pass 1: histogram.
    std::vector<std::vector<std::uint64_t>> hists(W);
    run_workers(W, [&](int w) {
        auto& h = hists[w];
        h.assign(kBins, 0);
        const std::uint64_t c = block_begin(N, W, w + 1) - block_begin(N, W, w);
        generate_block(n, alpha, seed, w, c, [&](double s) { ++h[bin_of(s, dn)]; });
    });
    std::vector<std::uint64_t> cum(kBins + 1, 0);
    for (std::size_t b = 0; b < kBins; ++b) {
        std::uint64_t sum = 0;
        for (int w = 0; w < W; ++w) sum += hists[w][b];
        cum[b + 1] = cum[b] + sum;
    }
    hists.clear();

    // Bins holding each needed rank.
    std::vector<RankPlan> plans;
    std::vector<std::uint64_t> ranks;
    for (double q : qs) {
        plans.push_back(plan_ranks(N, q));
        ranks.insert(ranks.end(), {plans.back().point, plans.back().lo, plans.back().hi});
    }
    auto bin_of_rank = [&](std::uint64_t r) {
        // First bin whose cumulative count reaches r.
        return static_cast<std::size_t>(std::lower_bound(cum.begin() + 1, cum.end(), r) - cum.begin()) - 1;
    };
    std::vector<char> wanted(kBins, 0);
    for (std::uint64_t r : ranks) wanted[bin_of_rank(r)] = 1;
    std::vector<std::size_t> slot(kBins, 0);
    std::vector<std::size_t> wanted_bins;
    for (std::size_t b = 0; b < kBins; ++b) {
        if (wanted[b]) {
            slot[b] = wanted_bins.size();
            wanted_bins.push_back(b);
        }
    }

    // Pass 2: regenerate and keep the values in the wanted bins.
    std::vector<std::vector<std::vector<double>>> kept(W, std::vector<std::vector<double>>(wanted_bins.size()));
    run_workers(W, [&](int w) {
        auto& mine = kept[w];
        const std::uint64_t c = block_begin(N, W, w + 1) - block_begin(N, W, w);
        generate_block(n, alpha, seed, w, c, [&](double s) {
            const std::size_t b = bin_of(s, dn);
            if (wanted[b]) mine[slot[b]].push_back(s);
        });
    });
    std::vector<std::vector<double>> merged(wanted_bins.size());
    for (std::size_t i = 0; i < wanted_bins.size(); ++i) {
        for (int w = 0; w < W; ++w) merged[i].insert(merged[i].end(), kept[w][i].begin(), kept[w][i].end());
        std::sort(merged[i].begin(), merged[i].end());
    }
    auto value_at = [&](std::uint64_t r) {
        const std::size_t b = bin_of_rank(r);
        return merged[slot[b]][r - cum[b] - 1];
    };

    std::vector<QuantileWithCI> out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const RankPlan& p = plans[i];
        out.push_back(assemble(qs[i], confidence, N, p, value_at(p.point), value_at(p.lo), value_at(p.hi)));
    }
    return out;
}

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'X', 'S', 'U', 'M', 'S', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U u;
    std::memcpy(&u, &v, sizeof(T));
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
    os.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw Error("load_empirical: truncated file");
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(buf[i]) << (8 * i);
    T v;
    std::memcpy(&v, &u, sizeof(T));
    return v;
}

}  // namespace

void save_empirical(const EmpiricalDistribution& e, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("save_empirical: cannot open " + path.string());
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.workers));
    put_le<std::int64_t>(os, e.n);
    put_le<double>(os, e.alpha);
    put_le<std::uint64_t>(os, e.size());
    put_le<std::uint64_t>(os, e.seed);
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(e.sorted.data()),
                 static_cast<std::streamsize>(e.sorted.size() * sizeof(double)));
    } else {
        for (double v : e.sorted) put_le<double>(os, v);
    }
    if (!os) throw Error("save_empirical: write failed for " + path.string());
}

EmpiricalDistribution load_empirical(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("load_empirical: cannot open " + path.string());
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
        throw Error("load_empirical: " + path.string() + " is not a sample file");
    }
    if (get_le<std::uint32_t>(is) != kVersion) throw Error("load_empirical: unsupported version");
    EmpiricalDistribution e;
    e.workers = static_cast<int>(get_le<std::uint32_t>(is));
    e.n = static_cast<int>(get_le<std::int64_t>(is));
    e.alpha = get_le<double>(is);
    const auto N = get_le<std::uint64_t>(is);
    e.seed = get_le<std::uint64_t>(is);
    e.sorted.resize(N);
    if constexpr (std::endian::native == std::endian::little) {
        if (!is.read(reinterpret_cast<char*>(e.sorted.data()), static_cast<std::streamsize>(N * sizeof(double)))) {
            throw Error("load_empirical: truncated file");
        }
    } else {
        for (auto& v : e.sorted) v = get_le<double>(is);
    }
    return e;
}

GridDensity exact_sum_pdf_grid(int n, double alpha, const SumGridCfg& cfg) {
    if (n < 1) throw DomainError("exact_sum_pdf_grid: n must be at least 1");
    if (n > kExactSumMaxN) {
        std::ostringstream msg;
        msg << "exact_sum_pdf_grid: n = " << n << " exceeds the cap of " << kExactSumMaxN
            << "; use the Monte Carlo oracle";
        throw UnsupportedRangeError(msg.str());
    }
    const ParetoModel model(alpha);
    const double end = std::pow(cfg.tail_mass, -1.0 / alpha);
    const GridDensity base =
        pareto_grid(model, make_mixed_edges(1.0, cfg.linear_step, cfg.linear_cells, cfg.ratio, end));

    auto convolve = [](const GridDensity& a, const GridDensity& b) {
        const double complete = std::min(a.support_end() + b.support_start(), b.support_end() + a.support_start());
        return grid_convolve(a, b).truncated(complete);
    };
    // Binary powering: f^{n*} from f^{2^j *}.
    GridDensity result;
    bool have = false;
    GridDensity power = base;
    for (int m = n;;) {
        if (m & 1) {
            result = have ? convolve(result, power) : power;
            have = true;
        }
        m >>= 1;
        if (m == 0) break;
        power = convolve(power, power);
    }
    return result;
}

}  // namespace normex
