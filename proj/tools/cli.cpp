#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "normex/baselines.hpp"
#include "normex/dist_core.hpp"
#include "normex/error_bound.hpp"
#include "normex/errors.hpp"
#include "normex/normex.hpp"
#include "normex/oracle.hpp"

namespace normex::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string>& all_methods() {
    static const std::vector<std::string> m{"gclt", "gclt1bis", "clt", "max", "zaliapin", "normex"};
    return m;
}

std::vector<std::string> valid_methods(double alpha) {
    std::vector<std::string> out;
    if (alpha > 0.0 && alpha <= 2.0) out.push_back("gclt");
    if (alpha > 0.5 && alpha < 2.0) out.push_back("gclt1bis");
    if (alpha > 2.0) out.push_back("clt");
    if (alpha > 0.0) out.push_back("max");
    if (alpha > 2.0 / 3.0 && alpha < 2.0) out.push_back("zaliapin");
    if (alpha * (kMaxK + 1) > 4.0) out.push_back("normex");
    return out;
}

double method_quantile(const std::string& method, int n, double alpha, double q) {
    if (method == "gclt") return gclt_quantile(n, alpha, q);
    if (method == "gclt1bis") return gclt_tail_quantile(n, alpha, q);
    if (method == "clt") return clt_quantile(n, alpha, q);
    if (method == "max") return max_evt_quantile(n, alpha, q);
    if (method == "zaliapin") return zaliapin_quantile(n, alpha, q);
    if (method == "normex") return normex_quantile(NormexApprox(n, alpha), q);
    throw UsageError("unknown method '" + method + "'");
}

std::string cache_file_name(const SimSpec& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "sums_n%d_a%.17g_N%llu_s%llu_w%d.bin", s.n, s.alpha,
                  static_cast<unsigned long long>(s.samples), static_cast<unsigned long long>(s.seed), s.workers);
    return buf;
}

std::vector<SimQuantile> simulated_quantiles(const SimSpec& s, const std::vector<double>& qs) {
    SimulateCfg cfg;
    cfg.workers = s.workers;
    std::vector<SimQuantile> out;
    auto from = [&](const QuantileWithCI& r) { out.push_back({r.q, r.point, r.ci_low, r.ci_high}); };

    if (8 * s.samples > cfg.memory_cap_bytes) {
        for (const auto& r : streaming_quantiles(s.n, s.alpha, s.samples, s.seed, qs, s.confidence, cfg)) from(r);
        return out;
    }
    EmpiricalDistribution e;
    std::optional<fs::path> path;
    if (s.cache_dir) path = *s.cache_dir / cache_file_name(s);
    bool loaded = false;
    if (path && fs::exists(*path)) {
        try {
            e = load_empirical(*path);
            loaded = e.n == s.n && e.alpha == s.alpha && e.size() == s.samples && e.seed == s.seed &&
                     e.workers == s.workers;
        } catch (const Error&) {
            loaded = false;  // unreadable cache: regenerate
        }
    }
    if (!loaded) {
        e = simulate_sums(s.n, s.alpha, s.samples, s.seed, cfg);
        if (path) {
            fs::create_directories(path->parent_path());
            save_empirical(e, *path);
        }
    }
    for (double q : qs) from(empirical_quantile(e, q, s.confidence));
    return out;
}

namespace {

void check_methods(const std::vector<std::string>& methods, double alpha) {
    if (methods.empty()) throw UsageError("no methods given; valid for this alpha: " + [&] {
        std::string s;
        for (const auto& m : valid_methods(alpha)) s += (s.empty() ? "" : ",") + m;
        return s;
    }());
    const auto ok = valid_methods(alpha);
    for (const auto& m : methods) {
        if (std::find(ok.begin(), ok.end(), m) == ok.end()) {
            std::ostringstream msg;
            const bool known = std::find(all_methods().begin(), all_methods().end(), m) != all_methods().end();
            msg << (known ? "method '" + m + "' is not defined for alpha = " : "unknown method '" + m + "' for alpha = ")
                << alpha << "; valid: ";
            for (std::size_t i = 0; i < ok.size(); ++i) msg << (i ? "," : "") << ok[i];
            throw UsageError(msg.str());
        }
    }
}

// Runs body(i) for i in [0, count) on up to `workers` threads; rethrows the
// first failure.
template <class Body>
void parallel_for(int count, int workers, Body body) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string signed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f", v);
    return buf;
}

}  // namespace

std::vector<ComparisonRow> compare(const CompareSpec& spec) {
    check_methods(spec.methods, spec.sim.alpha);
    if (spec.qs.empty()) throw UsageError("no quantile levels given");
    for (double q : spec.qs)
        if (!(q > 0.0 && q < 1.0)) throw DomainError("compare: q outside (0,1)");

    const auto sim = simulated_quantiles(spec.sim, spec.qs);
    std::vector<ComparisonRow> rows(spec.qs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].sim = sim[i];

    const int nq = static_cast<int>(spec.qs.size());
    for (const auto& m : spec.methods) {
        std::vector<double> z(nq);
        if (m == "normex") {
            const NormexApprox a(spec.sim.n, spec.sim.alpha);
            parallel_for(nq, spec.sim.workers, [&](int i) { z[i] = normex_quantile(a, spec.qs[i]); });
        } else {
            for (int i = 0; i < nq; ++i) z[i] = method_quantile(m, spec.sim.n, spec.sim.alpha, spec.qs[i]);
        }
        for (int i = 0; i < nq; ++i) rows[i].z[m] = z[i];
    }
    return rows;
}

void write_compare_csv(std::ostream& os, const CompareSpec& spec, const std::vector<ComparisonRow>& rows) {
    os << "q,z_sim,ci_lo,ci_hi";
    for (const auto& m : spec.methods) os << ",z_" << m << ",delta_" << m << "_pct";
    os << "\n";
    for (const auto& r : rows) {
        char q[32];
        std::snprintf(q, sizeof q, "%g", r.sim.q);
        os << q << "," << fixed2(r.sim.z) << "," << fixed2(r.sim.ci_lo) << "," << fixed2(r.sim.ci_hi);
        for (const auto& m : spec.methods) os << "," << fixed2(r.z.at(m)) << "," << signed2(r.delta_pct(m));
        os << "\n";
    }
}

void write_compare_json(std::ostream& os, const CompareSpec& spec, const std::vector<ComparisonRow>& rows) {
    json j;
    j["n"] = spec.sim.n;
    j["alpha"] = spec.sim.alpha;
    j["samples"] = spec.sim.samples;
    j["seed"] = spec.sim.seed;
    j["workers"] = spec.sim.workers;
    j["confidence"] = spec.sim.confidence;
    j["methods"] = spec.methods;
    j["rows"] = json::array();
    for (const auto& r : rows) {
        json row{{"q", r.sim.q}, {"z_sim", r.sim.z}, {"ci_lo", r.sim.ci_lo}, {"ci_hi", r.sim.ci_hi}};
        for (const auto& m : spec.methods) row[m] = {{"z", r.z.at(m)}, {"delta_pct", r.delta_pct(m)}};
        j["rows"].push_back(row);
    }
    os << j.dump(2) << "\n";
}

namespace {

std::string fraction(int num, int den) {
    const int g = std::gcd(num, den);
    num /= g;
    den /= g;
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace

std::string k_interval_label(double alpha, int p) {
    const int k = select_k(alpha, p);
    if (k == 1 && alpha > p) return "]" + std::to_string(p) + ";+inf[";
    if (p == 4) {
        if (k == 1) return "[2,4]";
        if (k == 2 && alpha < 2.0) return "]4/3;2[";
    }
    return "]" + fraction(p, k + 1) + ";" + fraction(p, k) + "]";
}

std::string kselect_report(double alpha, int p) {
    const int k = select_k(alpha, p);
    std::ostringstream os;
    os << "alpha = " << alpha << ", p = " << p << "\n";
    os << "k = " << k << "\n";
    os << "rule: smallest k with alpha (k+1) > p: " << alpha << " * " << k + 1 << " = " << alpha * (k + 1) << " > "
       << p;
    if (k > 1) os << " (k = " << k - 1 << " gives " << alpha * k << " <= " << p << ")";
    os << "\n";
    os << "interval: " << k_interval_label(alpha, p) << "\n";
    if (p == 4 && alpha == 2.0) {
        os << "note: alpha = " << alpha << " sits on the boundary. The usual table puts it in [2,4] with k = 1, "
           << "but the 4th moment of the maximum is finite only for alpha > 2, so the strict rule gives k = " << k
           << " (NormexCfg::k overrides the choice).\n";
    }
    return os.str();
}

namespace {

int default_workers() {
    if (const char* w = std::getenv("NORMEX_WORKERS")) {
        try {
            const int v = std::stoi(w);
            if (v >= 1) return v;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

std::optional<fs::path> default_cache_dir() {
    if (const char* d = std::getenv("NORMEX_CACHE_DIR")) return fs::path(d);
    if (const char* x = std::getenv("XDG_CACHE_HOME")) return fs::path(x) / "normex";
    if (const char* h = std::getenv("HOME")) return fs::path(h) / ".cache" / "normex";
    return std::nullopt;
}

struct Output {
    std::ofstream file;
    std::ostream* os;

    Output(const std::string& path, std::ostream& fallback) : os(&fallback) {
        if (!path.empty() && path != "-") {
            file.open(path);
            if (!file) throw Error("cannot open " + path + " for writing");
            os = &file;
        }
    }
};

void add_sim_options(CLI::App* sub, SimSpec& s, std::string& cache, bool& no_cache) {
    sub->add_option("--n", s.n, "number of summands")->required()->check(CLI::PositiveNumber);
    sub->add_option("--alpha", s.alpha, "Pareto tail index")->required()->check(CLI::PositiveNumber);
    sub->add_option("--mc-samples,-N", s.samples, "Monte Carlo sample size")->capture_default_str();
    sub->add_option("--seed", s.seed, "master seed")->capture_default_str();
    sub->add_option("--workers", s.workers, "worker threads (default $NORMEX_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--confidence", s.confidence, "confidence level of the intervals")->capture_default_str();
    sub->add_option("--cache-dir", cache, "sample cache directory (default $NORMEX_CACHE_DIR or ~/.cache/normex)");
    sub->add_flag("--no-cache", no_cache, "do not read or write the sample cache");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantiles of Pareto sums: Normex and competing approximations"};
    app.require_subcommand(1);

    SimSpec sim;
    sim.workers = default_workers();
    std::string cache, output, format = "csv", summary;
    bool no_cache = false;
    std::vector<double> qs;
    std::vector<std::string> methods;

    auto* cmp = app.add_subcommand("compare", "quantile table: simulation against approximation methods");
    add_sim_options(cmp, sim, cache, no_cache);
    cmp->add_option("--q", qs, "quantile levels")->required()->delimiter(',');
    cmp->add_option("--methods", methods, "gclt,gclt1bis,clt,max,zaliapin,normex")->required()->delimiter(',');
    cmp->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmp->add_option("--output,-o", output, "output file (default stdout)");

    auto* simc = app.add_subcommand("simulate", "simulate S_n, store the sample and summarise quantiles");
    add_sim_options(simc, sim, cache, no_cache);
    simc->add_option("--q", qs, "quantile levels")->delimiter(',');
    simc->add_option("--output,-o", output, "sample file (default: the cache entry)");
    simc->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    int n_bound = 52, points = 200;
    double alpha_bound = 2.5;
    BoundCfg bcfg;
    auto* bnd = app.add_subcommand("bound", "curve of the error bound K(x) and its maximum");
    bnd->add_option("--n", n_bound)->required()->check(CLI::PositiveNumber);
    bnd->add_option("--alpha", alpha_bound)->required();
    bnd->add_option("--points", points, "grid size over [n, 3 x_max]")->capture_default_str()->check(CLI::Range(200, 100000));
    bnd->add_option("--c", bcfg.c, "Berry-Esseen constant")->capture_default_str();
    bnd->add_flag("--uniform", bcfg.uniform_form, "uniform form without the (1+|z|)^3 factor");
    bnd->add_flag("--extrapolate", bcfg.allow_extrapolation, "accept 3 < alpha <= 4");
    bnd->add_option("--output,-o", output, "curve CSV (default stdout)");
    bnd->add_option("--summary", summary, "summary JSON (default stdout, or stderr when the curve goes to stdout)");

    double alpha_risk = 2.0;
    auto* risk = app.add_subcommand("risk", "VaR and expected shortfall of a single Pareto risk");
    risk->add_option("--alpha", alpha_risk)->required();
    risk->add_option("--q", qs)->required()->delimiter(',');
    risk->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    double alpha_k = 2.0;
    int p = 4;
    auto* ks = app.add_subcommand("kselect", "number of top order statistics treated exactly");
    ks->add_option("--alpha", alpha_k)->required();
    ks->add_option("--p", p, "moment order required of the trimmed sum")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }
    if (!no_cache) sim.cache_dir = cache.empty() ? default_cache_dir() : std::optional<fs::path>(cache);

    try {
        if (*cmp) {
            CompareSpec spec{sim, qs, methods};
            const auto rows = compare(spec);
            Output o(output, out);
            if (format == "json")
                write_compare_json(*o.os, spec, rows);
            else
                write_compare_csv(*o.os, spec, rows);
        } else if (*simc) {
            for (double q : qs)
                if (!(q > 0.0 && q < 1.0)) throw DomainError("simulate: q outside (0,1)");
            SimulateCfg scfg;
            scfg.workers = sim.workers;
            const auto e = simulate_sums(sim.n, sim.alpha, sim.samples, sim.seed, scfg);
            fs::path path = output.empty() && sim.cache_dir ? *sim.cache_dir / cache_file_name(sim) : fs::path(output);
            if (path.empty()) throw UsageError("simulate: give --output or a cache directory");
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            save_empirical(e, path);
            if (qs.empty()) qs = {0.95, 0.99, 0.995};
            json j{{"file", path.string()}, {"n", sim.n}, {"alpha", sim.alpha}, {"samples", sim.samples},
                   {"seed", sim.seed}, {"workers", sim.workers}, {"quantiles", json::array()}};
            if (format == "csv") out << "q,z_sim,ci_lo,ci_hi\n";
            for (double q : qs) {
                const auto r = empirical_quantile(e, q, sim.confidence);
                if (format == "csv") {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "%g,%.2f,%.2f,%.2f\n", q, r.point, r.ci_low, r.ci_high);
                    out << buf;
                }
                j["quantiles"].push_back({{"q", q}, {"z", r.point}, {"ci_lo", r.ci_low}, {"ci_hi", r.ci_high}});
            }
            if (format == "json") out << j.dump(2) << "\n";
            else err << "wrote " << path.string() << "\n";
        } else if (*bnd) {
            const auto mx = find_K_max(n_bound, alpha_bound, bcfg);
            const auto curve = bound_curve(n_bound, alpha_bound, n_bound, 3.0 * mx.x_max, points, bcfg, sim.workers);
            Output o(output, out);
            char buf[96];
            *o.os << "x,K\n";
            for (std::size_t i = 0; i < curve.x.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", curve.x[i], curve.K[i]);
                *o.os << buf;
            }
            const json s{{"n", n_bound}, {"alpha", alpha_bound}, {"c", bcfg.c}, {"uniform", bcfg.uniform_form},
                         {"x_max", mx.x_max}, {"K_max", mx.K_max}};
            if (!summary.empty()) {
                Output so(summary, out);
                *so.os << s.dump(2) << "\n";
            } else {
                (o.os == &out ? err : out) << s.dump(2) << "\n";
            }
        } else if (*risk) {
            const ParetoModel m(alpha_risk);
            json j = json::array();
            if (format == "csv") out << "q,var,es\n";
            for (double q : qs) {
                const auto r = pareto_var_es(m, q);
                if (format == "csv") {
                    char buf[128];
                    if (r.es)
                        std::snprintf(buf, sizeof buf, "%g,%.10g,%.10g\n", q, r.var, *r.es);
                    else
                        std::snprintf(buf, sizeof buf, "%g,%.10g,inf\n", q, r.var);
                    out << buf;
                }
                j.push_back({{"q", q}, {"var", r.var}, {"es", r.es ? json(*r.es) : json(nullptr)}});
            }
            if (format == "json") out << j.dump(2) << "\n";
        } else if (*ks) {
            out << kselect_report(alpha_k, p);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return kExitNumerical;
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}

}  // namespace normex::cli
