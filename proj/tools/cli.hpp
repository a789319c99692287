#pragma once

// Command logic behind the `normex` executable, kept separate from main() so
// the tests can drive it in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace normex::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,  // I/O failures and anything unexpected
    kExitUsage = 2,
    kExitDomain = 3,
    kExitNumerical = 4,
    kExitCapacity = 5,
};

/// Bad command line (unknown method, method invalid for alpha, empty list).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Methods understood by `compare`.
const std::vector<std::string>& all_methods();
/// The subset of all_methods() defined for this tail index.
std::vector<std::string> valid_methods(double alpha);

/// Quantile of S_n by one method; DomainError for q outside its range.
double method_quantile(const std::string& method, int n, double alpha, double q);

struct SimSpec {
    int n = 52;
    double alpha = 2.5;
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 42;
    int workers = 1;
    double confidence = 0.95;
    std::optional<std::filesystem::path> cache_dir;  // no caching when empty
};

struct SimQuantile {
    double q;
    double z;
    double ci_lo;
    double ci_hi;
};

/// Empirical quantiles with intervals. Reuses or fills the cache when set;
/// samples too large to hold are streamed instead (and not cached).
std::vector<SimQuantile> simulated_quantiles(const SimSpec& s, const std::vector<double>& qs);

/// File name of the cached sample for this spec.
std::string cache_file_name(const SimSpec& s);

struct ComparisonRow {
    SimQuantile sim;
    std::map<std::string, double> z;  // per method
    /// z_method / z_sim - 1, in percent.
    double delta_pct(const std::string& method) const { return 100.0 * (z.at(method) / sim.z - 1.0); }
};

struct CompareSpec {
    SimSpec sim;
    std::vector<double> qs;
    std::vector<std::string> methods;
};

/// UsageError when a method is unknown or invalid for alpha, or the list is empty.
std::vector<ComparisonRow> compare(const CompareSpec& spec);

void write_compare_csv(std::ostream& os, const CompareSpec& spec, const std::vector<ComparisonRow>& rows);
void write_compare_json(std::ostream& os, const CompareSpec& spec, const std::vector<ComparisonRow>& rows);

/// Interval of alpha sharing k(alpha), e.g. "]4/5;1]". For p = 4 the labels
/// follow the usual table ("]4/3;2[" and "[2,4]" around the boundary).
std::string k_interval_label(double alpha, int p);

/// Text report of k(alpha): k, the inequality, the interval and, at alpha =
/// p/2 exactly, the boundary note.
std::string kselect_report(double alpha, int p);

/// Runs one command line (args exclude the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace normex::cli
