#pragma once

#include "misa/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace misa::harness {

namespace fs = std::filesystem;

// Flat JSON document, e.g.
//   {"dataset": "data/wine.csv", "schema": "data/wine.schema.json",
//    "model": "gain", "mechanism": "mcar", "rate": 0.5,
//    "misa": true, "alpha": "auto", "repeats": 5, "seed": 7, "out": "runs/wine"}
struct ExperimentConfig {
    fs::path dataset;
    fs::path schema;
    models::ModelKind model = models::ModelKind::gain;
    mask::Mechanism mechanism = mask::Mechanism::mcar;
    double rate = 0.5;
    double observed_fraction = 0.3;
    bool misa = false;
    // Unset means the model default (DAE 5, GAIN 100).
    std::optional<double> alpha;
    bool auto_alpha = false;
    bool backprop_through_imputation = false;
    int repeats = 1;
    int folds = 5;
    std::uint64_t seed = 0;
    std::optional<int> epochs;
    int batch_size = 64;
    double learning_rate = 1e-3;
    bool accuracy = false;
    fs::path out = "runs";

    void validate() const;  // also checks that dataset and schema exist
    double effective_alpha() const;
    metrics::CvConfig cv_config() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const fs::path& path);
// Canonical JSON form; parse_config(config_json(c)) == c.
std::string config_json(const ExperimentConfig& cfg);
// 16 hex digits of a 64-bit FNV-1a hash of config_json.
std::string run_id(const ExperimentConfig& cfg);

struct ExperimentResult {
    ExperimentConfig config;
    metrics::ScoreReport report;
    double wall_seconds = 0.0;
    std::string run_id;
    fs::path results_file;
    fs::path losses_file;
};

// Runs the experiment without touching the filesystem beyond reading data.
ExperimentResult evaluate(const ExperimentConfig& cfg);

// evaluate() then persist results.json and losses.csv into cfg.out. Both
// files are written to a temporary name and renamed into place; on any
// failure the partial outputs are removed and a stage_error naming the
// failing stage is thrown.
ExperimentResult run(const ExperimentConfig& cfg);

// results.json body. Timing fields live under "timing" so everything else
// is a pure function of the config.
std::string results_json(const ExperimentResult& result);
// losses.csv body: epoch,l_ori,l_aug,hybrid
std::string losses_csv(const std::vector<augment::EpochLoss>& curve);

// Write `content` to `path` via a sibling temp file and rename.
void write_atomic(const fs::path& path, const std::string& content);

struct ComparisonRow {
    std::string label;  // "gain" or "gain+"
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    double improvement_pct = 0.0;  // relative to the baseline row; 0 for it
};

struct Comparison {
    std::vector<ComparisonRow> rows;
};

struct ResultSummary {
    std::string model;
    bool misa = false;
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
};

ResultSummary read_result_summary(const fs::path& results_json_path);
Comparison compare(const ResultSummary& baseline, const ResultSummary& augmented);
Comparison compare(const fs::path& baseline_results, const fs::path& augmented_results);
double improvement_pct(double baseline, double augmented);
std::string comparison_csv(const Comparison& cmp);
Comparison parse_comparison_csv(const std::string& text);

struct SweepRow {
    std::string label;  // "baseline" or the alpha / rate value
    double alpha = 0.0;
    double rate = 0.0;
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    std::uint64_t seed = 0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

// One baseline run plus one augmented run per alpha.
SweepTable sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas);
// One baseline and one augmented run per rate.
SweepTable sweep_rate(const ExperimentConfig& cfg, const std::vector<double>& rates);
std::string sweep_csv(const SweepTable& table);

} // namespace misa::harness
