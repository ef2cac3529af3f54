#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "table.hpp"

namespace hycard {

// ---------------------------------------------------------------------------
// Row cleaning
// ---------------------------------------------------------------------------

struct OutlierRules {
    struct Bound {
        std::string column;
        double lo;
        double hi;  // inclusive on both ends
    };
    struct Relational {
        std::string left;
        char op;  // '>' or '<'
        std::string right;
    };
    std::vector<Bound> bounds;
    std::vector<Relational> relational;

    bool empty() const { return bounds.empty() && relational.empty(); }
    std::string to_json() const;
    static OutlierRules from_json(const std::string& json_text);

    // Broad physiologic plausibility bounds for the dataset1 column layout.
    static OutlierRules physiologic_dataset1();
    // Tighter default used by the experiment runner for dataset1; trims the
    // distribution tails as well as impossible readings.
    static OutlierRules default_dataset1();
};

// Keeps the first occurrence of each distinct row; id columns are ignored in
// the comparison. Row order is preserved.
RawTable deduplicate(const RawTable& table);

// Drops every row violating a bound or relational rule. Second member of the
// result is the number of removed rows. Unknown columns raise ConfigError.
std::pair<RawTable, size_t> filter_outliers(const RawTable& table, const OutlierRules& rules);

long age_days_to_years(long days);  // floor(days / 365.25)

enum class BPCategory : int { Normal = 0, Elevated = 1, Stage1 = 2, Stage2 = 3, Crisis = 4 };

// AHA 2017 staging from systolic/diastolic mmHg; the most severe matching
// stage wins. Inputs must be positive.
BPCategory categorize_bp(double systolic, double diastolic);

struct PrepareOptions {
    bool drop_missing_target = true;
    bool dedup = true;
    bool convert_age_days = false;   // dataset1: age column holds days
    bool add_bp_category = false;    // dataset1: append ordinal bp_category column
    OutlierRules rules;
};

PrepareOptions default_prepare_options(const DatasetDescriptor& descriptor);

struct PrepareReport {
    size_t rows_in = 0;
    size_t missing_target_dropped = 0;
    size_t duplicates_removed = 0;
    size_t outliers_removed = 0;
    size_t rows_out = 0;
};

// dedup -> age conversion -> outlier filter -> blood-pressure category.
RawTable prepare_table(const RawTable& table, const PrepareOptions& options,
                       PrepareReport* report = nullptr);

// ---------------------------------------------------------------------------
// Encoding & scaling
// ---------------------------------------------------------------------------

struct FeatureMatrix {
    size_t n = 0;
    size_t d = 0;
    std::vector<double> values;  // row-major
    std::vector<std::string> feature_names;

    double& at(size_t r, size_t c) { return values[r * d + c]; }
    double at(size_t r, size_t c) const { return values[r * d + c]; }
    const double* row(size_t r) const { return values.data() + r * d; }
    static FeatureMatrix zeros(size_t n, size_t d);
};

using LabelVector = std::vector<int>;

struct EncodingMap {
    struct Column {
        std::string name;
        ColumnKind kind;
        std::vector<std::string> categories;  // one-hot slots, lexicographic; empty = passthrough
    };
    // Feature-space group of one source column: [offset, offset+size).
    struct Group {
        size_t offset;
        size_t size;
        bool one_hot;
    };
    std::vector<Column> columns;
    std::vector<Group> groups;
    std::vector<std::string> feature_names;
    size_t dim = 0;
};

// Training-fold statistics for filling missing cells: median for numeric
// kinds, mode for nominal columns.
struct ImputeStats {
    std::vector<double> numeric_fill;        // indexed by table column
    std::vector<std::string> category_fill;  // indexed by table column
};

ImputeStats fit_imputer(const RawTable& table, const std::vector<size_t>& rows);

EncodingMap fit_encoding(const RawTable& table, const std::vector<size_t>& rows);

struct EncodedData {
    FeatureMatrix X;
    LabelVector y;
    size_t unseen_cells = 0;  // nominal values absent from the fitted map
};

// Encodes the selected rows with a fitted map. Unseen nominal categories
// produce an all-zero group and are counted. Missing cells require `imputer`;
// without one they raise DataError.
EncodedData apply_encoding(const RawTable& table, const EncodingMap& map,
                           const std::vector<size_t>& rows,
                           const ImputeStats* imputer = nullptr);

// Fit + apply over all rows (table must contain no missing cells).
EncodedData encode(const RawTable& table, EncodingMap* map_out = nullptr);

struct NormalizationParams {
    std::vector<double> min;
    std::vector<double> max;
    size_t dim() const { return min.size(); }
};

// Min/max observed over `rows` only.
NormalizationParams fit_normalizer(const FeatureMatrix& X, const std::vector<size_t>& rows);

// x' = (x - min) / (max - min); constant features map to 0. Values outside
// the fitted range are not clipped.
FeatureMatrix apply_normalizer(const FeatureMatrix& X, const NormalizationParams& params);

// ---------------------------------------------------------------------------
// Class balancing & splits
// ---------------------------------------------------------------------------

struct SmoteResult {
    FeatureMatrix X;
    LabelVector y;
    std::vector<uint8_t> synthetic;  // 1 for generated rows
    struct Origin {
        size_t base;      // minority row index in the input matrix
        size_t neighbor;  // chosen nearest-neighbor row index
        double lambda;    // interpolation coefficient in [0, 1]
    };
    std::vector<Origin> origins;  // one per synthetic row, in output order
    size_t k_used = 0;
    bool k_clamped = false;
};

// SMOTE over continuous features: each synthetic minority row interpolates
// between a minority sample and one of its k nearest minority neighbors
// (Euclidean). One-hot groups are copied from the nearer parent instead of
// interpolated. Original rows are retained unchanged; output classes are
// exactly balanced. Minority class must have at least 2 samples; k is clamped
// to minority-size - 1 when necessary.
SmoteResult smote_oversample(const FeatureMatrix& X, const LabelVector& y, size_t k, uint64_t seed,
                             const std::vector<EncodingMap::Group>* snap_groups = nullptr);

// Stratified train/test split: per-class test counts are round(count * fraction).
// Returned index vectors are sorted, disjoint, and exhaustive.
std::pair<std::vector<size_t>, std::vector<size_t>> split_holdout(size_t n, double test_fraction,
                                                                  uint64_t seed,
                                                                  const LabelVector& y);

}  // namespace hycard
