#pragma once

#include "wiom/dataset.hpp"
#include "wiom/nn.hpp"
#include "wiom/pose.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace wiom {

// Euclidean distance in the horizontal plane, metres.
double horizontal_error(const Pose& pred, const Pose& truth);

// min(|d| mod 360, 360 - |d| mod 360), degrees in [0, 180].
double heading_error(double pred_deg, double truth_deg);
double heading_error(const Pose& pred, const Pose& truth);

// Nearest-rank percentile: ascending sort, value at 1-based index
// ceil(level/100 * n). Throws ConfigError on an empty list or level outside
// (0, 100].
double percentile(std::vector<double> values, double level);

struct ErrorReport {
    std::string source;     // network name or "knn"
    std::string split_kind; // "leu" or "heu"
    std::uint64_t seed = 0;
    std::vector<double> position_errors; // metres, one per test record
    std::vector<double> heading_errors;  // degrees in [0, 180]
    // level -> (position error m, heading error deg)
    std::map<int, std::pair<double, double>> percentiles;

    void compute_percentiles(); // fills levels 68, 95, 99
};

// Runs the model over the split's test records.
ErrorReport evaluate(const Model& model, const Dataset& ds, const SplitAssignment& split,
                     const std::string& source_name);

// k-NN oracle over the same feature tensors the networks see: normalized with
// train-only statistics, flattened, concatenated over the selected BSs.
// Position is the mean of the k nearest train poses, heading their circular
// mean. bs_selection empty = all BSs.
ErrorReport knn_baseline(const Dataset& ds, const SplitAssignment& split, int k,
                         const std::vector<std::string>& bs_selection = {});

// CSV export: per_sample.csv (index, position_error_m, heading_error_deg),
// cdf_position.csv / cdf_heading.csv (error, cumulative_fraction at every
// sample), summary.csv (network, split, p68/p95/p99 position, then heading).
void write_report(const ErrorReport& report, const std::filesystem::path& dir);

// Merges the summary lines of several report directories into one CSV.
void write_combined_summary(const std::vector<std::filesystem::path>& report_dirs,
                            const std::filesystem::path& out_file);

} // namespace wiom
