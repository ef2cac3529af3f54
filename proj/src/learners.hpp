#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nn.hpp"
#include "preprocess.hpp"

namespace hycard {

// Uniform contract every learner (and the ensemble) satisfies:
// predict(x) = 1 exactly when predict_proba(x) >= 0.5.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual const std::string& name() const = 0;
    virtual const std::string& kind() const = 0;
    virtual void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) = 0;
    virtual std::vector<double> predict_proba(const FeatureMatrix& X) const = 0;
    virtual bool fitted() const = 0;

    std::vector<int> predict(const FeatureMatrix& X) const;

    // Cost profile: analytic count for networks, node-parameter estimate for
    // tree ensembles, nothing for instance-based learners.
    virtual std::optional<long long> parameter_count() const { return std::nullopt; }

    void require_fitted() const;
};

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

class KnnClassifier final : public Classifier {
public:
    explicit KnnClassifier(size_t k);

    const std::string& name() const override { return name_; }
    const std::string& kind() const override { return kind_; }
    void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) override;
    std::vector<double> predict_proba(const FeatureMatrix& X) const override;
    bool fitted() const override { return fitted_; }

    // Probability = positive share of the k nearest training rows (Euclidean);
    // distance ties prefer the lower training-row index.
    double proba_one(const double* x) const;
    size_t k() const { return k_; }

private:
    size_t k_;
    std::string name_, kind_ = "knn";
    FeatureMatrix train_;
    LabelVector labels_;
    bool fitted_ = false;
};

// ---------------------------------------------------------------------------
// Gradient-boosted trees (second-order logistic boosting, exact greedy splits)
// ---------------------------------------------------------------------------

struct GbtHyper {
    size_t trees = 100;
    size_t max_depth = 6;
    double eta = 0.1;
    double lambda = 1.0;
    double gamma = 0.0;
};

struct GbtNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf = 0.0;
};

struct GbtTree {
    std::vector<GbtNode> nodes;
    double value(const double* x) const;
};

class GbtClassifier final : public Classifier {
public:
    explicit GbtClassifier(GbtHyper hyper);

    const std::string& name() const override { return name_; }
    const std::string& kind() const override { return kind_; }
    void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) override;
    std::vector<double> predict_proba(const FeatureMatrix& X) const override;
    bool fitted() const override { return fitted_; }
    std::optional<long long> parameter_count() const override;

    double base_score() const { return base_score_; }
    const std::vector<GbtTree>& trees() const { return trees_; }
    const std::vector<double>& round_losses() const { return round_losses_; }
    const GbtHyper& hyper() const { return hyper_; }

    nlohmann::ordered_json to_json() const;
    static GbtClassifier from_json(const nlohmann::json& j);

private:
    GbtHyper hyper_;
    std::string name_, kind_ = "xgb";
    double base_score_ = 0.0;  // prior log-odds
    std::vector<GbtTree> trees_;
    std::vector<double> round_losses_;
    size_t n_features_ = 0;
    bool fitted_ = false;
};

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

class GaussianNbClassifier final : public Classifier {
public:
    GaussianNbClassifier();
    const std::string& name() const override { return name_; }
    const std::string& kind() const override { return kind_; }
    void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) override;
    std::vector<double> predict_proba(const FeatureMatrix& X) const override;
    bool fitted() const override { return fitted_; }

private:
    std::string name_, kind_ = "nb";
    std::vector<double> mean_[2], var_[2];
    double log_prior_[2] = {0, 0};
    bool fitted_ = false;
};

struct LogisticHyper {
    double learning_rate = 0.5;
    double tolerance = 1e-6;  // on the gradient L2 norm
    size_t max_iterations = 10000;
};

class LogisticClassifier final : public Classifier {
public:
    explicit LogisticClassifier(LogisticHyper hyper = {});
    const std::string& name() const override { return name_; }
    const std::string& kind() const override { return kind_; }
    void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) override;
    std::vector<double> predict_proba(const FeatureMatrix& X) const override;
    bool fitted() const override { return fitted_; }
    size_t iterations_run() const { return iterations_; }

private:
    LogisticHyper hyper_;
    std::string name_, kind_ = "lr";
    std::vector<double> w_;
    double b_ = 0.0;
    size_t iterations_ = 0;
    bool fitted_ = false;
};

struct DecisionTreeHyper {
    size_t max_depth = 6;
};

class DecisionTreeClassifier final : public Classifier {
public:
    explicit DecisionTreeClassifier(DecisionTreeHyper hyper = {});
    const std::string& name() const override { return name_; }
    const std::string& kind() const override { return kind_; }
    void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) override;
    std::vector<double> predict_proba(const FeatureMatrix& X) const override;
    bool fitted() const override { return fitted_; }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1, right = -1;
        double p_positive = 0.0;
    };
    int build(const FeatureMatrix& X, const LabelVector& y, std::vector<size_t>& rows, size_t depth);

    DecisionTreeHyper hyper_;
    std::string name_, kind_ = "dt";
    std::vector<Node> nodes_;
    bool fitted_ = false;
};

// ---------------------------------------------------------------------------
// Neural wrappers
// ---------------------------------------------------------------------------

// cnn / lstm / cnn_lstm behind the classifier contract. The network is built
// at fit time, once the feature width is known; tabular rows are presented as
// a length-d single-channel sequence.
class NeuralClassifier final : public Classifier {
public:
    NeuralClassifier(std::string kind, TrainConfig config);

    const std::string& name() const override { return name_; }
    const std::string& kind() const override { return kind_; }
    void fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) override;
    std::vector<double> predict_proba(const FeatureMatrix& X) const override;
    bool fitted() const override { return net_ != nullptr; }
    std::optional<long long> parameter_count() const override;

    double final_train_loss() const { return train_info_.final_loss; }
    const Network* network() const { return net_.get(); }
    static std::vector<LayerSpec> stack_for_kind(const std::string& kind);

private:
    std::string kind_, name_;
    TrainConfig config_;
    std::unique_ptr<Network> net_;
    TrainInfo train_info_;
};

// ---------------------------------------------------------------------------
// Factory
// ---------------------------------------------------------------------------

extern const std::vector<std::string> kClassifierKinds;  // sorted

// Builds a contract-conforming classifier from a kind name and a JSON
// hyperparameter object. Unknown kinds and unknown/invalid hyperparameters
// raise ConfigError naming the offender.
std::unique_ptr<Classifier> make_classifier(const std::string& kind,
                                            const nlohmann::json& hyperparams);

// Recorded search grids used when a model entry asks for "grid": "default".
nlohmann::ordered_json default_grid(const std::string& kind);

}  // namespace hycard
