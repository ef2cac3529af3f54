#include "metrics.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "errors.hpp"

namespace hycard {

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ConfigError("confusion: y_true has " + std::to_string(y_true.size()) +
                          " entries, y_pred has " + std::to_string(y_pred.size()));
    ConfusionMatrix cm;
    for (size_t i = 0; i < y_true.size(); ++i) {
        int t = y_true[i], p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1))
            throw DataError("confusion: labels must be 0 or 1 (index " + std::to_string(i) + ")");
        if (t == 1)
            p == 1 ? ++cm.tp : ++cm.fn;
        else
            p == 1 ? ++cm.fp : ++cm.tn;
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ConfigError("metrics: empty confusion matrix");
    MetricsReport r;
    const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);

    r.accuracy = (tp + tn) / static_cast<double>(cm.total());
    if (tp + fp > 0)
        r.precision = tp / (tp + fp);
    else
        r.precision_degenerate = true;
    if (tp + fn > 0)
        r.recall = tp / (tp + fn);
    else
        r.recall_degenerate = true;
    if (r.precision + r.recall > 0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else
        r.f1_degenerate = true;
    if (tn + fp > 0)
        r.specificity = tn / (tn + fp);
    else
        r.specificity_degenerate = true;
    return r;
}

double MetricsReport::by_name(const char* name) const {
    if (std::strcmp(name, "accuracy") == 0) return accuracy;
    if (std::strcmp(name, "precision") == 0) return precision;
    if (std::strcmp(name, "recall") == 0) return recall;
    if (std::strcmp(name, "f1") == 0) return f1;
    if (std::strcmp(name, "specificity") == 0) return specificity;
    throw ConfigError(std::string("unknown metric '") + name + "'");
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.size() < 2) throw ConfigError("mean_std: need at least 2 values");
    // Welford's update; the tests cross-check against a two-pass computation.
    double mean = 0.0, m2 = 0.0;
    size_t count = 0;
    for (double v : values) {
        ++count;
        double delta = v - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (v - mean);
    }
    double var = m2 / static_cast<double>(count - 1);
    return {mean, std::sqrt(std::max(0.0, var))};
}

}  // namespace hycard
