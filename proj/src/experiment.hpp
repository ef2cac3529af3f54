#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cv.hpp"
#include "ensemble.hpp"
#include "stats.hpp"

namespace hycard {

struct ModelConfig {
    std::string kind;
    nlohmann::ordered_json hyperparams;  // object or null
    nlohmann::ordered_json grid;         // object or null; "default" resolves per kind
};

struct SyntheticConfig {
    size_t n = 2000;
    double class_balance = 0.5;
    uint64_t seed = 1;
    std::string schema = "dataset2";
};

// Declarative experiment description. Parsed from a single JSON document;
// validation errors name the offending field.
struct ExperimentConfig {
    std::string dataset;  // dataset1 | dataset2 | synthetic | custom
    std::string data_path;
    std::string custom_schema;
    SyntheticConfig synthetic;
    std::optional<size_t> subsample;
    std::vector<ModelConfig> models;
    std::vector<std::string> ensemble_members;
    size_t cv_k = 10;
    uint64_t cv_seed = 42;
    double holdout_fraction = 0.2;
    uint64_t holdout_seed = 42;
    std::optional<OutlierRules> outlier_rules;
    size_t smote_k = 5;
    bool smote_enabled = true;
    std::string output_dir;
    bool emit_votes = false;
    std::string format = "both";  // markdown | csv | both

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_json_text(const std::string& text);
    nlohmann::ordered_json to_json() const;
    void validate() const;
};

// Default model set reproducing the comparison tables, and the reduced set for
// the ablation (constituents of the hybrid plus its deep baselines).
std::vector<ModelConfig> default_model_set();
std::vector<ModelConfig> ablation_model_set();
extern const std::vector<std::string> kDefaultEnsembleMembers;

std::string display_name(const std::string& kind);

struct TTestRow {
    std::string model;
    std::string versus;
    bool ok = true;
    TTestResult result;
    std::string note;  // set when the test is degenerate
};

struct ModelResult {
    std::string kind;
    std::string display;
    std::string full_name;
    nlohmann::ordered_json hyperparams;
    std::vector<GridCell> grid_cells;  // empty when no grid search ran
    CVSummary cv;
    MetricsReport holdout;
    std::optional<long long> params;
    double mean_fit_seconds = 0.0;
};

struct DatasetSummary {
    std::string name;
    size_t rows_loaded = 0;
    PrepareReport prepare;
    std::optional<size_t> subsample;
    size_t rows_used = 0;
    size_t train_rows = 0;
    size_t holdout_rows = 0;
};

struct ReportBundle {
    nlohmann::ordered_json config_echo;
    DatasetSummary dataset;
    std::vector<ModelResult> models;

    std::vector<std::string> ensemble_members;  // kinds
    std::vector<double> ensemble_weights;       // all-fold-mean weights used on the holdout
    CVSummary ensemble_cv;
    MetricsReport ensemble_holdout;
    std::optional<long long> ensemble_params;
    double ensemble_mean_fit_seconds = 0.0;

    std::string strongest_baseline;  // display name
    std::vector<TTestRow> ttests;

    std::vector<size_t> holdout_row_indices;
    std::vector<VoteTrace> holdout_votes;  // populated when emit_votes

    // Deterministic for fixed config and seeds: timing fields are excluded
    // (they live in timings.json and the cost tables).
    nlohmann::ordered_json to_json() const;
};

// Full pipeline: ingest -> clean -> holdout split -> leakage-safe CV (shared
// folds across models) -> weighted-vote ensemble -> holdout scoring -> paired
// t-tests against the strongest single model.
ReportBundle run_experiment(const ExperimentConfig& config);

// "82.30 (0.23)" percentage-point formatting used by every table cell.
std::string format_mean_std_pct(double mean, double stddev);

// comparison/ablation/cost tables next to bundle.json; format selects
// markdown, csv, or both.
void write_bundle(const ReportBundle& bundle, const std::string& out_dir,
                  const std::string& format);

// Lightweight profile: param counts and per-fold training seconds for the
// configured models (no holdout, no significance tests).
nlohmann::ordered_json cost_profile(const ExperimentConfig& config);

// Clean the configured dataset and report retained counts; optionally writes
// the cleaned table as CSV.
nlohmann::ordered_json prepare_report(const ExperimentConfig& config,
                                      const std::string& cleaned_csv_path = "");

// Paired t-test between two saved bundles (per-fold CV accuracies of the given
// display-name model, or every common model when empty).
nlohmann::ordered_json ttest_bundles(const std::string& bundle_a_path,
                                     const std::string& bundle_b_path, const std::string& model,
                                     const std::string& metric);

}  // namespace hycard
