#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace hycard {

struct ConfusionMatrix {
    size_t tp = 0, tn = 0, fp = 0, fn = 0;
    size_t total() const { return tp + tn + fp + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// The five headline metrics. A zero denominator yields 0 with the matching
// degenerate flag set, so fold aggregation stays total.
struct MetricsReport {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, specificity = 0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
    bool specificity_degenerate = false;

    double by_name(const char* name) const;
};

MetricsReport metrics(const ConfusionMatrix& cm);

// Arithmetic mean and sample standard deviation (n-1 denominator); needs at
// least 2 values.
std::pair<double, double> mean_std(const std::vector<double>& values);

}  // namespace hycard
