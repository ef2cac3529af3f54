#include "ensemble.hpp"

#include "errors.hpp"

namespace hycard {

std::vector<double> compute_weights(const std::vector<double>& validation_accuracies) {
    if (validation_accuracies.empty()) throw ConfigError("compute_weights: no accuracies given");
    double total = 0.0;
    for (double a : validation_accuracies) {
        if (a < 0.0 || a > 1.0)
            throw ConfigError("compute_weights: accuracies must lie in [0, 1]");
        total += a;
    }
    if (total <= 0.0) throw ConfigError("compute_weights: all accuracies are zero");
    std::vector<double> w(validation_accuracies.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = validation_accuracies[i] / total;
    return w;
}

nlohmann::ordered_json VoteTrace::to_json() const {
    nlohmann::ordered_json j;
    j["labels"] = member_labels;
    j["weights"] = weights;
    j["score0"] = score[0];
    j["score1"] = score[1];
    j["winner"] = winner;
    j["tie"] = tie;
    return j;
}

std::pair<int, VoteTrace> vote(const std::vector<int>& labels, const std::vector<double>& weights) {
    if (labels.size() != weights.size())
        throw ConfigError("vote: " + std::to_string(labels.size()) + " labels vs " +
                          std::to_string(weights.size()) + " weights");
    if (labels.empty()) throw ConfigError("vote: no members");
    VoteTrace trace;
    trace.member_labels = labels;
    trace.weights = weights;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ConfigError("vote: member labels must be 0 or 1");
        trace.score[labels[i]] += weights[i];
    }
    trace.tie = trace.score[0] == trace.score[1];
    trace.winner = trace.score[1] > trace.score[0] ? 1 : 0;
    return {trace.winner, trace};
}

std::vector<int> vote_rows(const std::vector<std::vector<int>>& member_predictions,
                           const std::vector<double>& weights, std::vector<VoteTrace>* traces) {
    if (member_predictions.empty()) throw ConfigError("vote_rows: no members");
    const size_t n = member_predictions.front().size();
    for (const auto& preds : member_predictions)
        if (preds.size() != n) throw ConfigError("vote_rows: member prediction lengths differ");

    std::vector<int> out(n);
    std::vector<int> labels(member_predictions.size());
    for (size_t r = 0; r < n; ++r) {
        for (size_t m = 0; m < member_predictions.size(); ++m) labels[m] = member_predictions[m][r];
        auto [winner, trace] = vote(labels, weights);
        out[r] = winner;
        if (traces) traces->push_back(std::move(trace));
    }
    return out;
}

std::vector<int> ensemble_predict(const EnsembleSpec& spec, const FeatureMatrix& X,
                                  std::vector<VoteTrace>* traces) {
    if (spec.members.empty()) throw ConfigError("ensemble: no members");
    if (spec.members.size() != spec.weights.size())
        throw ConfigError("ensemble: member/weight count mismatch");
    for (const Classifier* m : spec.members)
        if (!m->fitted()) throw ConfigError("ensemble: member '" + m->name() + "' is not fitted");

    std::vector<std::vector<int>> preds;
    preds.reserve(spec.members.size());
    for (const Classifier* m : spec.members) preds.push_back(m->predict(X));
    return vote_rows(preds, spec.weights, traces);
}

}  // namespace hycard
