#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "learners.hpp"

namespace hycard {

// w_i = acc_i / sum(acc); accuracies must lie in [0,1] with at least one
// positive entry.
std::vector<double> compute_weights(const std::vector<double>& validation_accuracies);

struct VoteTrace {
    std::vector<int> member_labels;
    std::vector<double> weights;
    double score[2] = {0.0, 0.0};  // accumulated weight per class
    int winner = 0;
    bool tie = false;

    nlohmann::ordered_json to_json() const;
};

// Weighted hard majority vote over {0,1}: argmax_c sum_i w_i * [label_i == c].
// An exact tie resolves to class 0 and sets the tie flag.
std::pair<int, VoteTrace> vote(const std::vector<int>& labels, const std::vector<double>& weights);

struct EnsembleSpec {
    std::vector<const Classifier*> members;
    std::vector<double> weights;
};

// Row-wise weighted vote over the members' hard predictions. Unfitted members
// are reported by name. Traces (one per row) are optional.
std::vector<int> ensemble_predict(const EnsembleSpec& spec, const FeatureMatrix& X,
                                  std::vector<VoteTrace>* traces = nullptr);

// Same vote applied to precomputed member predictions (one vector per member).
std::vector<int> vote_rows(const std::vector<std::vector<int>>& member_predictions,
                           const std::vector<double>& weights,
                           std::vector<VoteTrace>* traces = nullptr);

}  // namespace hycard
