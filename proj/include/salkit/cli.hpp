#ifndef SALKIT_CLI_HPP_
#define SALKIT_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>

#include "salkit/fit.hpp"
#include "salkit/metrics.hpp"

namespace salkit::cli {

/// Batch metric evaluation. pred/gt/fix/neg may each be a file or a
/// directory; files pair one-to-one by sorted filename stem and the stem
/// sets must match exactly.
struct EvalJob {
    std::filesystem::path pred;
    std::filesystem::path gt;
    std::filesystem::path fix;         // empty: no fixations supplied
    std::filesystem::path negatives;   // empty: sauc unavailable
    std::string ig_baseline = "uniform"; // "uniform", "none", or a map file
    std::set<MetricKind> metrics;      // empty: default selection
    double eps = 1e-7;
    std::string format = "csv";        // "csv" | "json"
    std::filesystem::path out;
    bool keep_partial = false;
    int jobs = 0;                      // 0: available parallelism
};

struct FitJob {
    std::filesystem::path gt;
    int components = 32;
    CovMode cov_mode = CovMode::Diagonal;
    int iterations = 2000;
    std::uint64_t seed = 0;
    double lr = 1e-4;
    double cc_weight = 1.0;
    double eps = 1e-7;
    std::filesystem::path out; // GMM JSON; a .trace.csv lands alongside
};

struct RenderJob {
    std::filesystem::path gmm;
    int height = 256;
    int width = 256;
    bool ascii = false;
    std::filesystem::path out; // 16-bit PGM
};

struct SweepJob {
    std::string builtin;            // builtin scenario name, or empty
    std::filesystem::path spec;     // sweep spec JSON, or empty
    int raster_height = 0;          // 0: keep the spec/builtin default
    int raster_width = 0;
    std::filesystem::path out;      // CSV; a .spec.json lands alongside
};

int cmd_eval(const EvalJob& job, std::ostream& diag);
int cmd_fit(const FitJob& job, std::ostream& diag);
int cmd_render(const RenderJob& job, std::ostream& diag);
int cmd_sweep(const SweepJob& job, std::ostream& diag);

/// Full argv entry point (parses subcommands and flags).
int run(int argc, const char* const* argv);

} // namespace salkit::cli

#endif // SALKIT_CLI_HPP_
