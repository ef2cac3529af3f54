#include "cv.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include "errors.hpp"
#include "rng.hpp"

namespace hycard {

std::vector<std::vector<size_t>> stratified_kfold(const LabelVector& y, size_t k, uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
    std::vector<size_t> by_class[2];
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw DataError("stratified_kfold: labels must be 0 or 1");
        by_class[y[i]].push_back(i);
    }
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < k)
            throw DataError("stratified_kfold: class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " members, fewer than k=" +
                            std::to_string(k));

    std::vector<std::vector<size_t>> folds(k);
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        Rng rng(derive_seed(seed, 0xf01d5ull, static_cast<uint64_t>(c)));
        rng.shuffle(idx);
        // Rotate which folds receive the remainder so fold sizes stay level.
        const size_t rot = rng.index(k);
        for (size_t j = 0; j < idx.size(); ++j) folds[(j + rot) % k].push_back(idx[j]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

size_t resolve_threads() {
    if (const char* env = std::getenv("HYCARD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    const size_t workers = std::min(resolve_threads(), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Fold preparation
// ---------------------------------------------------------------------------

FoldData prepare_fold(const RawTable& table, const std::vector<size_t>& train_rows,
                      const std::vector<size_t>& val_rows, const CvConfig& cfg,
                      uint64_t fold_seed) {
    FoldData fold;
    fold.train_rows = train_rows;
    fold.val_rows = val_rows;

    fold.imputation = fit_imputer(table, train_rows);
    fold.encoding = fit_encoding(table, train_rows);

    EncodedData train = apply_encoding(table, fold.encoding, train_rows, &fold.imputation);

    std::vector<size_t> all_train(train.X.n);
    for (size_t i = 0; i < all_train.size(); ++i) all_train[i] = i;
    fold.normalization = fit_normalizer(train.X, all_train);
    FeatureMatrix X_train = apply_normalizer(train.X, fold.normalization);

    if (cfg.smote) {
        SmoteResult balanced =
            smote_oversample(X_train, train.y, cfg.smote_k, fold_seed, &fold.encoding.groups);
        fold.X_train = std::move(balanced.X);
        fold.y_train = std::move(balanced.y);
        fold.synthetic = std::move(balanced.synthetic);
        fold.smote_rows = fold.X_train.n - train.X.n;
    } else {
        fold.X_train = std::move(X_train);
        fold.y_train = std::move(train.y);
        fold.synthetic.assign(fold.X_train.n, 0);
    }

    if (!val_rows.empty()) {
        EncodedData val = apply_encoding(table, fold.encoding, val_rows, &fold.imputation);
        fold.X_val = apply_normalizer(val.X, fold.normalization);
        fold.y_val = std::move(val.y);
        fold.unseen_val_cells = val.unseen_cells;
    }
    return fold;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

double MetricMoments::by_name(const char* name) const {
    if (std::strcmp(name, "accuracy") == 0) return accuracy;
    if (std::strcmp(name, "precision") == 0) return precision;
    if (std::strcmp(name, "recall") == 0) return recall;
    if (std::strcmp(name, "f1") == 0) return f1;
    if (std::strcmp(name, "specificity") == 0) return specificity;
    throw ConfigError(std::string("unknown metric '") + name + "'");
}

std::vector<double> CVSummary::fold_metric(const char* name) const {
    std::vector<double> out;
    out.reserve(folds.size());
    for (const auto& r : folds) out.push_back(r.by_name(name));
    return out;
}

CVSummary CVSummary::aggregate(std::string model, std::vector<FoldOutcome>& outcomes) {
    CVSummary s;
    s.model = std::move(model);
    for (auto& o : outcomes) {
        s.folds.push_back(o.report);
        s.fold_seconds.push_back(o.fit_seconds);
    }
    const char* names[5] = {"accuracy", "precision", "recall", "f1", "specificity"};
    double* means[5] = {&s.mean.accuracy, &s.mean.precision, &s.mean.recall, &s.mean.f1,
                        &s.mean.specificity};
    double* stds[5] = {&s.stddev.accuracy, &s.stddev.precision, &s.stddev.recall, &s.stddev.f1,
                       &s.stddev.specificity};
    for (int m = 0; m < 5; ++m) {
        auto [mean, sd] = mean_std(s.fold_metric(names[m]));
        *means[m] = mean;
        *stds[m] = sd;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

CvEngine::CvEngine(const RawTable& table, std::vector<size_t> rows, CvConfig cfg)
    : cfg_(cfg), rows_(std::move(rows)) {
    const size_t target = table.descriptor.target_index();
    LabelVector y;
    y.reserve(rows_.size());
    for (size_t r : rows_) {
        const Cell& cell = table.rows[r][target];
        if (cell.tag != Cell::Tag::Number)
            throw DataError("row " + std::to_string(r + 1) + ": missing target label");
        y.push_back(static_cast<int>(cell.num));
    }

    auto fold_sets = stratified_kfold(y, cfg_.k, cfg_.seed);
    folds_.resize(fold_sets.size());
    parallel_for(fold_sets.size(), [&](size_t f) {
        std::vector<uint8_t> in_val(rows_.size(), 0);
        for (size_t local : fold_sets[f]) in_val[local] = 1;
        std::vector<size_t> train_rows, val_rows;
        train_rows.reserve(rows_.size() - fold_sets[f].size());
        val_rows.reserve(fold_sets[f].size());
        for (size_t i = 0; i < rows_.size(); ++i)
            (in_val[i] ? val_rows : train_rows).push_back(rows_[i]);

        size_t train_pos = 0, train_total = train_rows.size();
        for (size_t i = 0; i < rows_.size(); ++i)
            if (!in_val[i]) train_pos += static_cast<size_t>(y[i]);
        if (train_pos == 0 || train_pos == train_total)
            throw DataError("fold " + std::to_string(f + 1) +
                            ": a class vanished from the training rows");

        folds_[f] = prepare_fold(table, train_rows, val_rows, cfg_,
                                 derive_seed(cfg_.seed, 0xf01dull, f));
    });
}

FoldOutcome CvEngine::evaluate_fold(size_t fold_index, Classifier& clf,
                                    uint64_t model_seed) const {
    const FoldData& fold = folds_[fold_index];
    FoldOutcome out;
    out.val_rows = fold.val_rows;
    out.y_true = fold.y_val;

    const auto t0 = std::chrono::steady_clock::now();
    clf.fit(fold.X_train, fold.y_train, derive_seed(cfg_.seed, model_seed, fold_index));
    const auto t1 = std::chrono::steady_clock::now();
    out.fit_seconds = std::chrono::duration<double>(t1 - t0).count();

    out.proba = clf.predict_proba(fold.X_val);
    out.y_pred.resize(out.proba.size());
    for (size_t i = 0; i < out.proba.size(); ++i) out.y_pred[i] = out.proba[i] >= 0.5 ? 1 : 0;
    out.report = metrics(confusion(out.y_true, out.y_pred));
    return out;
}

CVSummary CvEngine::run(const std::function<std::unique_ptr<Classifier>()>& factory,
                        const std::string& name, uint64_t model_seed,
                        std::vector<FoldOutcome>* outcomes) const {
    std::vector<FoldOutcome> outs(folds_.size());
    parallel_for(folds_.size(), [&](size_t f) {
        auto clf = factory();
        outs[f] = evaluate_fold(f, *clf, model_seed);
    });
    CVSummary summary = CVSummary::aggregate(name, outs);
    if (outcomes) *outcomes = std::move(outs);
    return summary;
}

CVSummary run_cv(const std::function<std::unique_ptr<Classifier>()>& factory,
                 const std::string& name, const RawTable& table, const std::vector<size_t>& rows,
                 const CvConfig& cfg, uint64_t model_seed, std::vector<FoldOutcome>* outcomes) {
    CvEngine engine(table, rows, cfg);
    return engine.run(factory, name, model_seed, outcomes);
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

GridResult grid_search(const std::string& kind, const nlohmann::ordered_json& grid,
                       const nlohmann::ordered_json& base_hyperparams, const CvEngine& engine,
                       uint64_t model_seed) {
    if (!grid.is_object() || grid.empty())
        throw ConfigError("grid_search: grid must be a non-empty object of {param: [values...]}");

    std::vector<std::string> keys;
    std::vector<std::vector<nlohmann::ordered_json>> values;
    size_t cells = 1;
    for (auto it = grid.begin(); it != grid.end(); ++it) {
        if (!it.value().is_array() || it.value().empty())
            throw ConfigError("grid_search: grid entry '" + it.key() +
                              "' must be a non-empty array");
        keys.push_back(it.key());
        values.emplace_back(it.value().begin(), it.value().end());
        cells *= values.back().size();
    }

    GridResult result;
    std::vector<size_t> pick(keys.size(), 0);
    for (size_t cell = 0; cell < cells; ++cell) {
        nlohmann::ordered_json hp =
            base_hyperparams.is_object() ? base_hyperparams : nlohmann::ordered_json::object();
        nlohmann::ordered_json point = nlohmann::ordered_json::object();
        for (size_t i = 0; i < keys.size(); ++i) {
            hp[keys[i]] = values[i][pick[i]];
            point[keys[i]] = values[i][pick[i]];
        }

        CVSummary summary = engine.run([&] { return make_classifier(kind, hp); }, kind,
                                       derive_seed(model_seed, 0x9c1dull, cell));
        result.cells.push_back({point, summary.mean.accuracy});

        // Row-major increment: the last key varies fastest.
        for (size_t i = keys.size(); i-- > 0;) {
            if (++pick[i] < values[i].size()) break;
            pick[i] = 0;
        }
    }

    result.best_index = 0;
    for (size_t i = 1; i < result.cells.size(); ++i)
        if (result.cells[i].mean_accuracy > result.cells[result.best_index].mean_accuracy)
            result.best_index = i;
    result.best = result.cells[result.best_index].hyperparams;
    return result;
}

}  // namespace hycard
