#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace kernelcal::harness {

struct SeedRange {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;  // inclusive

    std::size_t count() const { return static_cast<std::size_t>(hi - lo + 1); }
    void validate() const;
};

// Parses "a..b" or a single "a".
SeedRange parse_seed_range(const std::string& text);

enum class ExperimentKind { toy, fixedpoints, bloom, thermo };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::toy;
    nlohmann::json payload;
    SeedRange seeds;
    std::string output_dir = ".";
    int parallelism = 1;

    void validate() const;
};

struct SeedStatus {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<std::string> files;
};

struct ExperimentOutcome {
    bool all_ok = true;
    std::vector<SeedStatus> statuses;
    std::string manifest_path;
};

// Creates the directory if needed and verifies it is writable before any
// compute starts.
void prepare_output_dir(const std::string& dir);

// Dispatches to the module entry points, writes the per-kind output files and
// a manifest.json echoing the full config. Reruns overwrite deterministically.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// One metrics.csv row of a bloom run; budget and flow columns ride along so
// comparisons can audit them.
struct MetricsRow {
    std::uint64_t seed = 0;
    std::string policy;
    double rmse_surface = 0.0;
    double rmse_subsurface = 0.0;
    double total_info = 0.0;
    double energy_used = 0.0;
    int samples_returned = 0;
    int violations = 0;
    double e_max = 0.0;
    int n_max = 0;
    double v_norm = 0.0;
};

std::vector<MetricsRow> read_metrics_csv(const std::string& path);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

// Exact one-sided sign test: P(Bin(n, 1/2) >= wins).
double sign_test_p_value(int wins, int n_nontie);

struct PairedStats {
    int n_pairs = 0;
    int wins = 0;    // first series strictly smaller (better RMSE)
    int losses = 0;
    int ties = 0;
    double win_fraction = 0.0;  // ties count 1/2
    double median_diff = 0.0;   // first minus second
    double p_value = 1.0;
};

struct ComparisonSummary {
    PairedStats surface;
    PairedStats subsurface;
    PairedStats surface_high_advection;
    PairedStats subsurface_high_advection;
    int high_advection_pairs = 0;
    double v_threshold = 0.05;
    bool budgets_equal = true;
    bool seeds_match = true;
};

// Pairs rows by seed and compares forecast RMSE of the first (adaptive)
// series against the second. Refuses mismatched seed sets or unequal
// (E_max, N_max) budgets.
ComparisonSummary compare_policies(const std::vector<MetricsRow>& adaptive,
                                   const std::vector<MetricsRow>& fixed,
                                   double v_threshold = 0.05);

nlohmann::json comparison_to_json(const ComparisonSummary& s);

// Locale-independent shortest-exact formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace kernelcal::harness
