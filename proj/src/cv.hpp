#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "learners.hpp"
#include "metrics.hpp"
#include "preprocess.hpp"
#include "table.hpp"

namespace hycard {

// Validator-fold index sets: a partition of {0..n-1} with per-class counts
// differing by at most 1 across folds. Deterministic per seed.
std::vector<std::vector<size_t>> stratified_kfold(const LabelVector& y, size_t k, uint64_t seed);

// Worker cap: HYCARD_THREADS when set (>= 1), otherwise the hardware count.
size_t resolve_threads();
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

struct CvConfig {
    size_t k = 10;
    uint64_t seed = 0;
    size_t smote_k = 5;
    bool smote = true;
};

// Everything a fold needs, with all fitted statistics (imputation, encoding,
// normalization) derived from the training rows only. SMOTE rows are tagged
// and never appear on the validation side.
struct FoldData {
    std::vector<size_t> train_rows;  // table row indices
    std::vector<size_t> val_rows;    // table row indices; always original rows
    FeatureMatrix X_train;           // encoded + normalized + oversampled
    LabelVector y_train;
    std::vector<uint8_t> synthetic;  // flags for X_train rows
    FeatureMatrix X_val;
    LabelVector y_val;
    EncodingMap encoding;
    NormalizationParams normalization;
    ImputeStats imputation;
    size_t unseen_val_cells = 0;
    size_t smote_rows = 0;
};

FoldData prepare_fold(const RawTable& table, const std::vector<size_t>& train_rows,
                      const std::vector<size_t>& val_rows, const CvConfig& cfg,
                      uint64_t fold_seed);

struct FoldOutcome {
    MetricsReport report;
    std::vector<size_t> val_rows;
    std::vector<int> y_true;
    std::vector<int> y_pred;
    std::vector<double> proba;
    double fit_seconds = 0.0;
};

struct MetricMoments {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, specificity = 0;
    double by_name(const char* name) const;
};

struct CVSummary {
    std::string model;
    std::vector<MetricsReport> folds;
    MetricMoments mean;
    MetricMoments stddev;  // sample std, n-1 denominator
    std::vector<double> fold_seconds;

    std::vector<double> fold_metric(const char* name) const;
    static CVSummary aggregate(std::string model, std::vector<FoldOutcome>& outcomes);
};

// Prepares the folds for one row subset once, so every model sees identical
// splits and transforms. Fold preparation runs in parallel; results are
// stored per slot and independent of scheduling.
class CvEngine {
public:
    CvEngine(const RawTable& table, std::vector<size_t> rows, CvConfig cfg);

    size_t fold_count() const { return folds_.size(); }
    const FoldData& fold(size_t i) const { return folds_[i]; }
    const CvConfig& config() const { return cfg_; }
    const std::vector<size_t>& rows() const { return rows_; }

    // Trains a fresh classifier from the factory on each fold (parallel across
    // folds) and scores the untouched validation rows.
    CVSummary run(const std::function<std::unique_ptr<Classifier>()>& factory,
                  const std::string& name, uint64_t model_seed,
                  std::vector<FoldOutcome>* outcomes = nullptr) const;

    FoldOutcome evaluate_fold(size_t fold_index, Classifier& clf, uint64_t model_seed) const;

private:
    CvConfig cfg_;
    std::vector<size_t> rows_;
    std::vector<FoldData> folds_;
};

// Single-model leakage-safe cross-validation over the given table rows.
CVSummary run_cv(const std::function<std::unique_ptr<Classifier>()>& factory,
                 const std::string& name, const RawTable& table, const std::vector<size_t>& rows,
                 const CvConfig& cfg, uint64_t model_seed = 0,
                 std::vector<FoldOutcome>* outcomes = nullptr);

struct GridCell {
    nlohmann::ordered_json hyperparams;
    double mean_accuracy = 0.0;
};

struct GridResult {
    nlohmann::ordered_json best;  // winning hyperparameter object
    size_t best_index = 0;
    std::vector<GridCell> cells;  // one per grid point, iteration order
};

// Exhaustive Cartesian search over {param: [values...]}; every cell merges the
// grid point over `base_hyperparams`. The winner maximizes mean validation
// accuracy, ties keep the earliest cell.
GridResult grid_search(const std::string& kind, const nlohmann::ordered_json& grid,
                       const nlohmann::ordered_json& base_hyperparams, const CvEngine& engine,
                       uint64_t model_seed);

}  // namespace hycard
