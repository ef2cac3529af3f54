#include "learners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace hycard {

std::vector<int> Classifier::predict(const FeatureMatrix& X) const {
    auto proba = predict_proba(X);
    std::vector<int> labels(proba.size());
    for (size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= 0.5 ? 1 : 0;
    return labels;
}

void Classifier::require_fitted() const {
    if (!fitted()) throw ConfigError(name() + ": predict called before fit");
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_both_classes(const LabelVector& y, const std::string& who) {
    size_t pos = 0;
    for (int v : y) pos += static_cast<size_t>(v);
    if (pos == 0 || pos == y.size())
        throw DataError(who + ": training data must contain both classes");
}

void check_xy(const FeatureMatrix& X, const LabelVector& y, const std::string& who) {
    if (X.n != y.size()) throw ConfigError(who + ": X and y row counts differ");
    if (X.n == 0) throw DataError(who + ": empty training data");
}

}  // namespace

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

KnnClassifier::KnnClassifier(size_t k) : k_(k) {
    if (k_ < 1) throw ConfigError("knn: k must be >= 1");
    name_ = "KNN(k=" + std::to_string(k_) + ")";
}

void KnnClassifier::fit(const FeatureMatrix& X, const LabelVector& y, uint64_t) {
    check_xy(X, y, name_);
    if (k_ > X.n)
        throw ConfigError(name_ + ": k exceeds training size " + std::to_string(X.n));
    train_ = X;
    labels_ = y;
    fitted_ = true;
}

double KnnClassifier::proba_one(const double* x) const {
    std::vector<std::pair<double, size_t>> dist(train_.n);
    for (size_t i = 0; i < train_.n; ++i) {
        const double* row = train_.row(i);
        double d2 = 0.0;
        for (size_t c = 0; c < train_.d; ++c) {
            const double diff = x[c] - row[c];
            d2 += diff * diff;
        }
        dist[i] = {d2, i};
    }
    // (distance, index) order makes the tie-break part of the sort key.
    std::nth_element(dist.begin(), dist.begin() + static_cast<long>(k_ - 1), dist.end());
    size_t positives = 0;
    for (size_t i = 0; i < k_; ++i) positives += static_cast<size_t>(labels_[dist[i].second]);
    return static_cast<double>(positives) / static_cast<double>(k_);
}

std::vector<double> KnnClassifier::predict_proba(const FeatureMatrix& X) const {
    require_fitted();
    if (X.d != train_.d)
        throw ConfigError(name_ + ": feature count mismatch (" + std::to_string(X.d) + " vs " +
                          std::to_string(train_.d) + ")");
    std::vector<double> out(X.n);
    for (size_t i = 0; i < X.n; ++i) out[i] = proba_one(X.row(i));
    return out;
}

// ---------------------------------------------------------------------------
// GBT
// ---------------------------------------------------------------------------

double GbtTree::value(const double* x) const {
    int node = 0;
    while (nodes[static_cast<size_t>(node)].feature >= 0) {
        const GbtNode& nd = nodes[static_cast<size_t>(node)];
        node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<size_t>(node)].leaf;
}

GbtClassifier::GbtClassifier(GbtHyper hyper) : hyper_(hyper) {
    // trees == 0 is legal: the model then predicts the prior log-odds.
    if (hyper_.max_depth < 1) throw ConfigError("xgb: depth must be >= 1");
    if (!(hyper_.eta > 0.0)) throw ConfigError("xgb: eta must be positive");
    if (hyper_.lambda < 0.0) throw ConfigError("xgb: lambda must be >= 0");
    if (hyper_.gamma < 0.0) throw ConfigError("xgb: gamma must be >= 0");
    std::ostringstream os;
    os << "XGB(trees=" << hyper_.trees << ",depth=" << hyper_.max_depth << ",eta=" << hyper_.eta
       << ")";
    name_ = os.str();
}

namespace {

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

// Exact greedy search: for every feature, sort the node's rows and evaluate
// the gain at each midpoint between consecutive distinct values.
SplitChoice best_split(const FeatureMatrix& X, const std::vector<double>& g,
                       const std::vector<double>& h, const std::vector<size_t>& rows,
                       double lambda, double gamma) {
    double g_total = 0.0, h_total = 0.0;
    for (size_t r : rows) {
        g_total += g[r];
        h_total += h[r];
    }
    const double parent_score = g_total * g_total / (h_total + lambda);

    SplitChoice best;
    std::vector<std::pair<double, size_t>> order(rows.size());
    for (size_t f = 0; f < X.d; ++f) {
        for (size_t i = 0; i < rows.size(); ++i) order[i] = {X.at(rows[i], f), rows[i]};
        std::sort(order.begin(), order.end());
        double gl = 0.0, hl = 0.0;
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            gl += g[order[i].second];
            hl += h[order[i].second];
            if (order[i].first == order[i + 1].first) continue;
            const double gr = g_total - gl, hr = h_total - hl;
            const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                       parent_score) -
                                gamma;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (order[i].first + order[i + 1].first);
            }
        }
    }
    return best;
}

}  // namespace

void GbtClassifier::fit(const FeatureMatrix& X, const LabelVector& y, uint64_t) {
    check_xy(X, y, name_);
    check_both_classes(y, name_);
    n_features_ = X.d;
    trees_.clear();
    round_losses_.clear();

    size_t pos = 0;
    for (int v : y) pos += static_cast<size_t>(v);
    base_score_ = std::log(static_cast<double>(pos) / static_cast<double>(y.size() - pos));

    std::vector<double> margin(X.n, base_score_);
    std::vector<double> g(X.n), h(X.n);

    for (size_t round = 0; round < hyper_.trees; ++round) {
        for (size_t i = 0; i < X.n; ++i) {
            const double p = sigmoid(margin[i]);
            g[i] = p - static_cast<double>(y[i]);
            h[i] = p * (1.0 - p);
        }

        GbtTree tree;
        struct Work {
            std::vector<size_t> rows;
            size_t depth;
            int node;
        };
        std::vector<size_t> all(X.n);
        for (size_t i = 0; i < X.n; ++i) all[i] = i;
        tree.nodes.push_back({});
        std::vector<Work> stack;
        stack.push_back({std::move(all), 0, 0});
        while (!stack.empty()) {
            Work work = std::move(stack.back());
            stack.pop_back();
            double g_sum = 0.0, h_sum = 0.0;
            for (size_t r : work.rows) {
                g_sum += g[r];
                h_sum += h[r];
            }
            SplitChoice choice;
            if (work.depth < hyper_.max_depth && work.rows.size() >= 2)
                choice = best_split(X, g, h, work.rows, hyper_.lambda, hyper_.gamma);
            if (choice.feature < 0 || choice.gain <= 0.0) {
                tree.nodes[static_cast<size_t>(work.node)].feature = -1;
                tree.nodes[static_cast<size_t>(work.node)].leaf = -g_sum / (h_sum + hyper_.lambda);
                continue;
            }
            std::vector<size_t> left, right;
            for (size_t r : work.rows)
                (X.at(r, static_cast<size_t>(choice.feature)) < choice.threshold ? left : right)
                    .push_back(r);
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            const int ri = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            GbtNode& nd = tree.nodes[static_cast<size_t>(work.node)];
            nd.feature = choice.feature;
            nd.threshold = choice.threshold;
            nd.left = li;
            nd.right = ri;
            stack.push_back({std::move(right), work.depth + 1, ri});
            stack.push_back({std::move(left), work.depth + 1, li});
        }

        for (size_t i = 0; i < X.n; ++i) margin[i] += hyper_.eta * tree.value(X.row(i));
        trees_.push_back(std::move(tree));

        double loss = 0.0;
        for (size_t i = 0; i < X.n; ++i) {
            const double z = margin[i];
            const double zy = z * static_cast<double>(y[i]);
            loss += std::max(z, 0.0) - zy + std::log1p(std::exp(-std::fabs(z)));
        }
        round_losses_.push_back(loss / static_cast<double>(X.n));
    }
    fitted_ = true;
}

std::vector<double> GbtClassifier::predict_proba(const FeatureMatrix& X) const {
    require_fitted();
    if (X.d != n_features_)
        throw ConfigError(name_ + ": feature count mismatch (" + std::to_string(X.d) + " vs " +
                          std::to_string(n_features_) + ")");
    std::vector<double> out(X.n);
    for (size_t i = 0; i < X.n; ++i) {
        double margin = base_score_;
        const double* row = X.row(i);
        for (const auto& tree : trees_) margin += hyper_.eta * tree.value(row);
        out[i] = sigmoid(margin);
    }
    return out;
}

std::optional<long long> GbtClassifier::parameter_count() const {
    if (!fitted_) return std::nullopt;
    long long count = 0;
    for (const auto& tree : trees_)
        for (const auto& nd : tree.nodes) count += nd.feature < 0 ? 1 : 2;
    return count;
}

nlohmann::ordered_json GbtClassifier::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "xgb";
    j["trees_cfg"] = hyper_.trees;
    j["max_depth"] = hyper_.max_depth;
    j["eta"] = hyper_.eta;
    j["lambda"] = hyper_.lambda;
    j["gamma"] = hyper_.gamma;
    j["base_score"] = base_score_;
    j["n_features"] = n_features_;
    j["trees"] = nlohmann::ordered_json::array();
    for (const auto& tree : trees_) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const auto& nd : tree.nodes) {
            if (nd.feature < 0)
                nodes.push_back({{"leaf", nd.leaf}});
            else
                nodes.push_back({{"feature", nd.feature},
                                 {"threshold", nd.threshold},
                                 {"left", nd.left},
                                 {"right", nd.right}});
        }
        j["trees"].push_back(std::move(nodes));
    }
    return j;
}

GbtClassifier GbtClassifier::from_json(const nlohmann::json& j) {
    GbtHyper hyper;
    hyper.trees = j.at("trees_cfg").get<size_t>();
    hyper.max_depth = j.at("max_depth").get<size_t>();
    hyper.eta = j.at("eta").get<double>();
    hyper.lambda = j.at("lambda").get<double>();
    hyper.gamma = j.at("gamma").get<double>();
    GbtClassifier clf(hyper);
    clf.base_score_ = j.at("base_score").get<double>();
    clf.n_features_ = j.at("n_features").get<size_t>();
    for (const auto& jt : j.at("trees")) {
        GbtTree tree;
        for (const auto& jn : jt) {
            GbtNode nd;
            if (jn.contains("leaf")) {
                nd.leaf = jn.at("leaf").get<double>();
            } else {
                nd.feature = jn.at("feature").get<int>();
                nd.threshold = jn.at("threshold").get<double>();
                nd.left = jn.at("left").get<int>();
                nd.right = jn.at("right").get<int>();
            }
            tree.nodes.push_back(nd);
        }
        clf.trees_.push_back(std::move(tree));
    }
    clf.fitted_ = true;
    return clf;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes
// ---------------------------------------------------------------------------

GaussianNbClassifier::GaussianNbClassifier() : name_("NB") {}

void GaussianNbClassifier::fit(const FeatureMatrix& X, const LabelVector& y, uint64_t) {
    check_xy(X, y, name_);
    check_both_classes(y, name_);
    constexpr double kVarFloor = 1e-9;
    size_t counts[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
        mean_[c].assign(X.d, 0.0);
        var_[c].assign(X.d, 0.0);
    }
    for (size_t i = 0; i < X.n; ++i) {
        const int c = y[i];
        ++counts[c];
        for (size_t f = 0; f < X.d; ++f) mean_[c][f] += X.at(i, f);
    }
    for (int c = 0; c < 2; ++c)
        for (size_t f = 0; f < X.d; ++f) mean_[c][f] /= static_cast<double>(counts[c]);
    for (size_t i = 0; i < X.n; ++i) {
        const int c = y[i];
        for (size_t f = 0; f < X.d; ++f) {
            const double d = X.at(i, f) - mean_[c][f];
            var_[c][f] += d * d;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (size_t f = 0; f < X.d; ++f)
            var_[c][f] = std::max(var_[c][f] / static_cast<double>(counts[c]), kVarFloor);
        log_prior_[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(X.n));
    }
    fitted_ = true;
}

std::vector<double> GaussianNbClassifier::predict_proba(const FeatureMatrix& X) const {
    require_fitted();
    if (X.d != mean_[0].size())
        throw ConfigError(name_ + ": feature count mismatch");
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    std::vector<double> out(X.n);
    for (size_t i = 0; i < X.n; ++i) {
        double ll[2];
        for (int c = 0; c < 2; ++c) {
            double acc = log_prior_[c];
            for (size_t f = 0; f < X.d; ++f) {
                const double d = X.at(i, f) - mean_[c][f];
                acc -= 0.5 * (kLog2Pi + std::log(var_[c][f]) + d * d / var_[c][f]);
            }
            ll[c] = acc;
        }
        out[i] = 1.0 / (1.0 + std::exp(ll[0] - ll[1]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

LogisticClassifier::LogisticClassifier(LogisticHyper hyper) : hyper_(hyper), name_("LR") {
    if (!(hyper_.learning_rate > 0.0)) throw ConfigError("lr: learning_rate must be positive");
    if (!(hyper_.tolerance > 0.0)) throw ConfigError("lr: tolerance must be positive");
    if (hyper_.max_iterations < 1) throw ConfigError("lr: max_iterations must be >= 1");
}

void LogisticClassifier::fit(const FeatureMatrix& X, const LabelVector& y, uint64_t) {
    check_xy(X, y, name_);
    check_both_classes(y, name_);
    w_.assign(X.d, 0.0);
    b_ = 0.0;
    const double inv_n = 1.0 / static_cast<double>(X.n);
    std::vector<double> grad(X.d);
    iterations_ = 0;
    for (size_t iter = 0; iter < hyper_.max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (size_t i = 0; i < X.n; ++i) {
            const double* row = X.row(i);
            double z = b_;
            for (size_t f = 0; f < X.d; ++f) z += w_[f] * row[f];
            const double err = (sigmoid(z) - static_cast<double>(y[i])) * inv_n;
            for (size_t f = 0; f < X.d; ++f) grad[f] += err * row[f];
            grad_b += err;
        }
        double norm2 = grad_b * grad_b;
        for (double gv : grad) norm2 += gv * gv;
        ++iterations_;
        if (std::sqrt(norm2) < hyper_.tolerance) break;
        for (size_t f = 0; f < X.d; ++f) w_[f] -= hyper_.learning_rate * grad[f];
        b_ -= hyper_.learning_rate * grad_b;
    }
    fitted_ = true;
}

std::vector<double> LogisticClassifier::predict_proba(const FeatureMatrix& X) const {
    require_fitted();
    if (X.d != w_.size()) throw ConfigError(name_ + ": feature count mismatch");
    std::vector<double> out(X.n);
    for (size_t i = 0; i < X.n; ++i) {
        const double* row = X.row(i);
        double z = b_;
        for (size_t f = 0; f < X.d; ++f) z += w_[f] * row[f];
        out[i] = sigmoid(z);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CART decision tree
// ---------------------------------------------------------------------------

DecisionTreeClassifier::DecisionTreeClassifier(DecisionTreeHyper hyper) : hyper_(hyper) {
    if (hyper_.max_depth < 1) throw ConfigError("dt: depth must be >= 1");
    name_ = "DT(depth=" + std::to_string(hyper_.max_depth) + ")";
}

namespace {

double gini(size_t pos, size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
}

}  // namespace

int DecisionTreeClassifier::build(const FeatureMatrix& X, const LabelVector& y,
                                  std::vector<size_t>& rows, size_t depth) {
    size_t pos = 0;
    for (size_t r : rows) pos += static_cast<size_t>(y[r]);

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<size_t>(index)].p_positive =
        static_cast<double>(pos) / static_cast<double>(rows.size());

    if (depth >= hyper_.max_depth || pos == 0 || pos == rows.size() || rows.size() < 2)
        return index;

    const double parent = gini(pos, rows.size());
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> order(rows.size());
    for (size_t f = 0; f < X.d; ++f) {
        for (size_t i = 0; i < rows.size(); ++i) order[i] = {X.at(rows[i], f), y[rows[i]]};
        std::sort(order.begin(), order.end());
        size_t lpos = 0;
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            lpos += static_cast<size_t>(order[i].second);
            if (order[i].first == order[i + 1].first) continue;
            const size_t ln = i + 1, rn = order.size() - ln;
            const double frac_l = static_cast<double>(ln) / static_cast<double>(order.size());
            const double gain = parent - frac_l * gini(lpos, ln) -
                                (1.0 - frac_l) * gini(pos - lpos, rn);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (order[i].first + order[i + 1].first);
            }
        }
    }
    if (best_feature < 0) return index;

    std::vector<size_t> left, right;
    for (size_t r : rows)
        (X.at(r, static_cast<size_t>(best_feature)) < best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int li = build(X, y, left, depth + 1);
    const int ri = build(X, y, right, depth + 1);
    Node& nd = nodes_[static_cast<size_t>(index)];
    nd.feature = best_feature;
    nd.threshold = best_threshold;
    nd.left = li;
    nd.right = ri;
    return index;
}

void DecisionTreeClassifier::fit(const FeatureMatrix& X, const LabelVector& y, uint64_t) {
    check_xy(X, y, name_);
    check_both_classes(y, name_);
    nodes_.clear();
    std::vector<size_t> rows(X.n);
    for (size_t i = 0; i < X.n; ++i) rows[i] = i;
    build(X, y, rows, 0);
    fitted_ = true;
}

std::vector<double> DecisionTreeClassifier::predict_proba(const FeatureMatrix& X) const {
    require_fitted();
    std::vector<double> out(X.n);
    for (size_t i = 0; i < X.n; ++i) {
        const double* row = X.row(i);
        int node = 0;
        while (nodes_[static_cast<size_t>(node)].feature >= 0) {
            const Node& nd = nodes_[static_cast<size_t>(node)];
            node = row[nd.feature] < nd.threshold ? nd.left : nd.right;
        }
        out[i] = nodes_[static_cast<size_t>(node)].p_positive;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Neural wrappers
// ---------------------------------------------------------------------------

std::vector<LayerSpec> NeuralClassifier::stack_for_kind(const std::string& kind) {
    if (kind == "cnn") return default_cnn_stack();
    if (kind == "lstm") return default_lstm_stack();
    if (kind == "cnn_lstm") return default_cnn_lstm_stack();
    throw ConfigError("unknown neural classifier kind '" + kind + "'");
}

NeuralClassifier::NeuralClassifier(std::string kind, TrainConfig config)
    : kind_(std::move(kind)), config_(config) {
    stack_for_kind(kind_);  // validate
    name_ = kind_ == "cnn" ? "CNN" : kind_ == "lstm" ? "LSTM" : "CNN-LSTM";
}

void NeuralClassifier::fit(const FeatureMatrix& X, const LabelVector& y, uint64_t seed) {
    check_xy(X, y, name_);
    TrainConfig cfg = config_;
    cfg.seed = seed;
    net_ = std::make_unique<Network>(stack_for_kind(kind_), X.d, 1, seed);
    train_info_ = train_network(*net_, X.values.data(), y.data(), X.n, cfg);
}

std::vector<double> NeuralClassifier::predict_proba(const FeatureMatrix& X) const {
    require_fitted();
    const size_t expected = net_->input_len();
    if (X.d != expected)
        throw ConfigError(name_ + ": feature count mismatch (" + std::to_string(X.d) + " vs " +
                          std::to_string(expected) + ")");
    // Chunked to bound activation memory on large tables.
    constexpr size_t kChunk = 256;
    std::vector<double> out;
    out.reserve(X.n);
    for (size_t start = 0; start < X.n; start += kChunk) {
        const size_t n = std::min(kChunk, X.n - start);
        auto probs = net_->forward(X.values.data() + start * X.d, n, false);
        out.insert(out.end(), probs.begin(), probs.end());
    }
    return out;
}

std::optional<long long> NeuralClassifier::parameter_count() const {
    return param_count(stack_for_kind(kind_));
}

// ---------------------------------------------------------------------------
// Factory
// ---------------------------------------------------------------------------

const std::vector<std::string> kClassifierKinds = {"cnn", "cnn_lstm", "dt",   "knn",
                                                   "lr",  "lstm",     "nb",   "xgb"};

namespace {

std::string kinds_csv() {
    std::string out;
    for (const auto& k : kClassifierKinds) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

void reject_unknown_keys(const std::string& kind, const nlohmann::json& hp,
                         std::initializer_list<const char*> allowed) {
    if (hp.is_null()) return;
    if (!hp.is_object()) throw ConfigError(kind + ": hyperparams must be a JSON object");
    for (auto it = hp.begin(); it != hp.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) ok = true;
        if (!ok) throw ConfigError(kind + ": unknown hyperparameter '" + it.key() + "'");
    }
}

template <typename T>
T get_or(const nlohmann::json& hp, const char* key, T fallback, const std::string& kind) {
    if (hp.is_null() || !hp.contains(key)) return fallback;
    try {
        return hp.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(kind + ": invalid value for hyperparameter '" + key + "'");
    }
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(const std::string& kind,
                                            const nlohmann::json& hyperparams) {
    const nlohmann::json& hp = hyperparams;
    if (kind == "knn") {
        reject_unknown_keys(kind, hp, {"k"});
        const long long k = get_or<long long>(hp, "k", 5, kind);
        if (k < 1) throw ConfigError("knn: hyperparameter 'k' must be >= 1");
        return std::make_unique<KnnClassifier>(static_cast<size_t>(k));
    }
    if (kind == "xgb") {
        reject_unknown_keys(kind, hp, {"trees", "depth", "eta", "lambda", "gamma"});
        GbtHyper hyper;
        hyper.trees = get_or<size_t>(hp, "trees", hyper.trees, kind);
        hyper.max_depth = get_or<size_t>(hp, "depth", hyper.max_depth, kind);
        hyper.eta = get_or<double>(hp, "eta", hyper.eta, kind);
        hyper.lambda = get_or<double>(hp, "lambda", hyper.lambda, kind);
        hyper.gamma = get_or<double>(hp, "gamma", hyper.gamma, kind);
        return std::make_unique<GbtClassifier>(hyper);
    }
    if (kind == "nb") {
        reject_unknown_keys(kind, hp, {});
        return std::make_unique<GaussianNbClassifier>();
    }
    if (kind == "lr") {
        reject_unknown_keys(kind, hp, {"learning_rate", "tolerance", "max_iterations"});
        LogisticHyper hyper;
        hyper.learning_rate = get_or<double>(hp, "learning_rate", hyper.learning_rate, kind);
        hyper.tolerance = get_or<double>(hp, "tolerance", hyper.tolerance, kind);
        hyper.max_iterations = get_or<size_t>(hp, "max_iterations", hyper.max_iterations, kind);
        return std::make_unique<LogisticClassifier>(hyper);
    }
    if (kind == "dt") {
        reject_unknown_keys(kind, hp, {"depth"});
        DecisionTreeHyper hyper;
        hyper.max_depth = get_or<size_t>(hp, "depth", hyper.max_depth, kind);
        return std::make_unique<DecisionTreeClassifier>(hyper);
    }
    if (kind == "cnn" || kind == "lstm" || kind == "cnn_lstm") {
        reject_unknown_keys(kind, hp, {"learning_rate", "epochs", "batch", "optimizer"});
        TrainConfig cfg;
        cfg.learning_rate = get_or<double>(hp, "learning_rate", cfg.learning_rate, kind);
        cfg.epochs = get_or<size_t>(hp, "epochs", cfg.epochs, kind);
        cfg.batch_size = get_or<size_t>(hp, "batch", cfg.batch_size, kind);
        const std::string opt = get_or<std::string>(hp, "optimizer", "adam", kind);
        if (opt == "adam")
            cfg.optimizer = TrainConfig::Optimizer::Adam;
        else if (opt == "sgd")
            cfg.optimizer = TrainConfig::Optimizer::Sgd;
        else
            throw ConfigError(kind + ": optimizer must be 'adam' or 'sgd'");
        return std::make_unique<NeuralClassifier>(kind, cfg);
    }
    throw ConfigError("unknown classifier kind '" + kind + "'; valid kinds: " + kinds_csv());
}

nlohmann::ordered_json default_grid(const std::string& kind) {
    nlohmann::ordered_json grid;
    if (kind == "knn") {
        grid["k"] = {3, 5, 7, 9, 11, 15};
    } else if (kind == "xgb") {
        grid["depth"] = {3, 4, 6};
        grid["eta"] = {0.05, 0.1, 0.3};
        grid["trees"] = {50, 100, 200};
    } else if (kind == "cnn" || kind == "lstm" || kind == "cnn_lstm") {
        grid["learning_rate"] = {1e-3, 3e-4};
        grid["epochs"] = {40, 60};
    } else {
        throw ConfigError("no default grid recorded for kind '" + kind + "'");
    }
    return grid;
}

}  // namespace hycard
