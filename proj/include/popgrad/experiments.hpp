#pragma once

#include <map>
#include <string>
#include <vector>

#include "popgrad/rng.hpp"

namespace popgrad {

// Deterministic, config-driven experiment harness. Each experiment writes a
// CSV of raw data plus a JSON report echoing the full effective config
// (defaults included) so a rerun with the same config is byte-identical.

struct ExperimentConfig {
    std::string experiment;
    RngSeed seed{1, 0};
    std::string output_dir = "out";
    int threads = 1;
    std::map<std::string, double> params;  // experiment-specific; defaults filled at run time
};

struct ExperimentReport {
    std::string experiment;
    bool passed = false;
    double wall_seconds = 0.0;
    std::string csv_path;
    std::string report_path;
    std::string summary_json;  // serialized summary incl. config echo
};

// Known experiment names, in dispatch order.
const std::vector<std::string>& experiment_names();

// Fills in every default parameter for the named experiment; unknown keys in
// the config are a validation error.
std::map<std::string, double> effective_params(const std::string& experiment,
                                               const std::map<std::string, double>& overrides);

ExperimentReport run(const ExperimentConfig& config);

// 2D descent-field grid (x, y, gx, gy) over [0, bound]^2 with the origin cell
// skipped; written as CSV. Returns the number of rows.
long emit_vector_field(int K, int grid, double bound, const std::string& csv_path);

}  // namespace popgrad
