// Acceptance suite: one binary, one line per criterion.
//
// Criteria that need the real public CSV files (the 70,000-row and 918-row
// heart-disease tables) run only when a file is found via HYCARD_DATASET1_CSV /
// HYCARD_DATASET2_CSV or data/ next to the repo root; otherwise they print
// SKIP and a synthetic-schema analogue exercises the same pipeline path.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cv.hpp"
#include "ensemble.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "learners.hpp"
#include "metrics.hpp"
#include "nn.hpp"
#include "preprocess.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "table.hpp"

using namespace hycard;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

void report(const char* status, const std::string& name, const std::string& detail) {
    std::printf("[%s] %-28s %s\n", status, name.c_str(), detail.c_str());
    std::fflush(stdout);
}

void run_criterion(const std::string& name, const std::function<std::string()>& body) {
    const double t0 = now_seconds();
    try {
        const std::string detail = body();
        char buf[32];
        std::snprintf(buf, sizeof(buf), " [%.1fs]", now_seconds() - t0);
        report("PASS", name, detail + buf);
    } catch (const std::exception& e) {
        ++g_failures;
        report("FAIL", name, e.what());
    }
}

void fail_if(bool condition, const std::string& message) {
    if (condition) throw std::runtime_error(message);
}

std::string find_dataset_file(const char* env_name, const char* file_name) {
    if (const char* env = std::getenv(env_name))
        if (fs::exists(env)) return env;
    for (const char* prefix : {"data/", "../data/", "../../data/"}) {
        const std::string candidate = std::string(prefix) + file_name;
        if (fs::exists(candidate)) return candidate;
    }
    return "";
}

// ---------------------------------------------------------------------------
// 1. metrics vs an independent counting implementation
// ---------------------------------------------------------------------------

std::string criterion_metrics_oracle() {
    Rng rng(1001);
    for (int trial = 0; trial < 10000; ++trial) {
        const size_t n = 1 + rng.index(500);
        std::vector<int> t(n), p(n);
        for (size_t i = 0; i < n; ++i) {
            t[i] = static_cast<int>(rng.index(2));
            p[i] = static_cast<int>(rng.index(2));
        }

        // independent per-element counting path
        double tp = 0, tn = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < n; ++i) {
            tp += (t[i] == 1 && p[i] == 1);
            tn += (t[i] == 0 && p[i] == 0);
            fp += (t[i] == 0 && p[i] == 1);
            fn += (t[i] == 1 && p[i] == 0);
        }
        const double acc = (tp + tn) / static_cast<double>(n);
        const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        const double spec = tn + fp > 0 ? tn / (tn + fp) : 0.0;

        const auto r = metrics(confusion(t, p));
        fail_if(std::fabs(r.accuracy - acc) >= 1e-12, "accuracy diverged");
        fail_if(std::fabs(r.precision - prec) >= 1e-12, "precision diverged");
        fail_if(std::fabs(r.recall - rec) >= 1e-12, "recall diverged");
        fail_if(std::fabs(r.f1 - f1) >= 1e-12, "f1 diverged");
        fail_if(std::fabs(r.specificity - spec) >= 1e-12, "specificity diverged");
    }
    return "10000 random label vectors, all five metrics exact";
}

// ---------------------------------------------------------------------------
// 2. gradient fidelity over random small architectures
// ---------------------------------------------------------------------------

std::string criterion_gradient_fidelity() {
    Rng rng(2002);
    const Activation smooth[2] = {Activation::Tanh, Activation::Sigmoid};
    double worst = 0.0;
    for (int arch = 0; arch < 50; ++arch) {
        std::vector<LayerSpec> stack;
        size_t input_len = 0, input_ch = 0;
        const size_t family = rng.index(4);
        const Activation act = smooth[rng.index(2)];
        if (family == 0) {  // dense
            input_ch = 2 + rng.index(10);
            size_t width = input_ch;
            const size_t layers = 1 + rng.index(2);
            for (size_t l = 0; l < layers; ++l) {
                const size_t next = 2 + rng.index(14);
                stack.push_back(LayerSpec::dense(width, next));
                stack.push_back(LayerSpec::activation(act));
                width = next;
            }
            stack.push_back(LayerSpec::dense(width, 1));
        } else if (family == 1) {  // conv
            input_len = 4 + rng.index(8);
            input_ch = 1;
            size_t ch = 1;
            const size_t layers = 1 + rng.index(2);
            for (size_t l = 0; l < layers; ++l) {
                const size_t next = 2 + rng.index(5);
                stack.push_back(LayerSpec::conv1d(ch, next, 1 + 2 * rng.index(3)));
                stack.push_back(LayerSpec::activation(act));
                ch = next;
            }
            stack.push_back(LayerSpec::global_avg_pool());
            stack.push_back(LayerSpec::dense(ch, 1));
        } else if (family == 2) {  // lstm
            input_len = 3 + rng.index(6);
            input_ch = 1 + rng.index(3);
            size_t ch = input_ch;
            const size_t layers = 1 + rng.index(2);
            for (size_t l = 0; l < layers; ++l) {
                const size_t hidden = 2 + rng.index(7);
                stack.push_back(LayerSpec::lstm(ch, hidden, l + 1 < layers));
                ch = hidden;
            }
            stack.push_back(LayerSpec::dense(ch, 1));
        } else {  // combined conv -> lstm
            input_len = 5 + rng.index(6);
            input_ch = 1;
            const size_t c1 = 2 + rng.index(4);
            const size_t c2 = 2 + rng.index(4);
            const size_t hidden = 3 + rng.index(6);
            stack.push_back(LayerSpec::conv1d(1, c1, 3));
            stack.push_back(LayerSpec::activation(act));
            stack.push_back(LayerSpec::conv1d(c1, c2, 3));
            stack.push_back(LayerSpec::activation(act));
            stack.push_back(LayerSpec::lstm(c2, hidden, false));
            stack.push_back(LayerSpec::dense(hidden, 1));
        }
        stack.push_back(LayerSpec::output_sigmoid());
        fail_if(param_count(stack) >= 5000, "architecture generator exceeded the size cap");

        const double err = grad_check(stack, input_len, input_ch, 3000 + arch);
        worst = std::max(worst, err);
        fail_if(err > 1e-6, "architecture " + std::to_string(arch) +
                                " exceeded 1e-6 (got " + std::to_string(err) + ")");
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "50 architectures, worst relative error %.2e", worst);
    return buf;
}

// ---------------------------------------------------------------------------
// 3. KNN vs the exhaustive oracle
// ---------------------------------------------------------------------------

std::string criterion_knn_oracle() {
    Rng rng(3003);
    FeatureMatrix X = FeatureMatrix::zeros(200, 3);
    LabelVector y(200);
    for (size_t i = 0; i < 200; ++i) {
        for (size_t c = 0; c < 3; ++c) X.at(i, c) = static_cast<double>(rng.index(6));
        y[i] = static_cast<int>(rng.index(2));
    }
    FeatureMatrix Q = FeatureMatrix::zeros(100, 3);
    for (size_t i = 0; i < 100; ++i)
        for (size_t c = 0; c < 3; ++c) Q.at(i, c) = static_cast<double>(rng.index(6));

    size_t tie_cases = 0;
    for (size_t k : {size_t(1), size_t(5), size_t(15)}) {
        KnnClassifier knn(k);
        knn.fit(X, y, 0);
        const auto proba = knn.predict_proba(Q);
        const auto labels = knn.predict(Q);
        for (size_t q = 0; q < Q.n; ++q) {
            // oracle: sort every (distance^2, index) pair
            std::vector<std::pair<double, size_t>> all(X.n);
            for (size_t i = 0; i < X.n; ++i) {
                double d2 = 0;
                for (size_t c = 0; c < 3; ++c) {
                    const double diff = Q.at(q, c) - X.at(i, c);
                    d2 += diff * diff;
                }
                all[i] = {d2, i};
            }
            std::sort(all.begin(), all.end());
            if (k < X.n && all[k - 1].first == all[k].first) ++tie_cases;
            size_t pos = 0;
            for (size_t i = 0; i < k; ++i) pos += static_cast<size_t>(y[all[i].second]);
            const double expect = static_cast<double>(pos) / static_cast<double>(k);
            fail_if(proba[q] != expect, "probability diverged from the oracle");
            fail_if(labels[q] != (expect >= 0.5 ? 1 : 0), "label diverged from the oracle");
        }
    }
    fail_if(tie_cases == 0, "fixture produced no distance ties; oracle not exercised");
    return "200 train / 100 queries, k in {1,5,15}, " + std::to_string(tie_cases) +
           " boundary ties, all equal";
}

// ---------------------------------------------------------------------------
// 4. GBT hand check
// ---------------------------------------------------------------------------

std::string criterion_gbt_hand_check() {
    FeatureMatrix X = FeatureMatrix::zeros(4, 1);
    X.values = {1, 2, 3, 4};
    X.feature_names = {"x"};
    const LabelVector y = {0, 0, 1, 1};

    GbtHyper hyper;
    hyper.trees = 1;
    hyper.max_depth = 1;
    hyper.lambda = 1.0;
    hyper.gamma = 0.0;
    GbtClassifier gbt(hyper);
    gbt.fit(X, y, 0);

    const auto& tree = gbt.trees().at(0);
    fail_if(tree.nodes.size() != 3, "expected a single split");
    fail_if(tree.nodes[0].feature != 0, "wrong split feature");
    fail_if(std::fabs(tree.nodes[0].threshold - 2.5) > 1e-12, "threshold is not 2.5");

    // hand evaluation: base = logit(0.5) = 0, p = 0.5, g = p - y, h = 0.25
    const double gl = 0.5 + 0.5, hl = 0.25 + 0.25;
    const double wl = -gl / (hl + 1.0);
    const double wr = -(-gl) / (hl + 1.0);
    fail_if(std::fabs(tree.value(X.row(0)) - wl) > 1e-12, "left leaf weight diverged");
    fail_if(std::fabs(tree.value(X.row(3)) - wr) > 1e-12, "right leaf weight diverged");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "threshold 2.5, leaves %+0.6f / %+0.6f", wl, wr);
    return buf;
}

// ---------------------------------------------------------------------------
// 5. voting vs brute-force accumulation
// ---------------------------------------------------------------------------

std::string criterion_voting() {
    Rng rng(5005);
    for (int trial = 0; trial < 10000; ++trial) {
        const size_t n = 1 + rng.index(8);
        std::vector<int> labels(n);
        std::vector<double> weights(n);
        for (size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.index(2));
            weights[i] = rng.index(8) == 0 ? 0.0 : rng.uniform();
        }
        double total = 0;
        for (double w : weights) total += w;
        if (total == 0.0) weights[rng.index(n)] = 0.5;

        double score[2] = {0.0, 0.0};
        for (size_t i = 0; i < n; ++i) score[labels[i]] += weights[i];
        const int expected = score[1] > score[0] ? 1 : 0;
        const auto [winner, trace] = vote(labels, weights);
        fail_if(winner != expected, "winner diverged from the accumulation oracle");
        fail_if(trace.tie != (score[0] == score[1]), "tie flag diverged");

        // equal weights reduce to plurality (0 on ties)
        size_t ones = 0;
        for (int l : labels) ones += static_cast<size_t>(l);
        const std::vector<double> equal(n, 1.0);
        fail_if(vote(labels, equal).first != (2 * ones > n ? 1 : 0),
                "equal weights diverged from plurality");

        // positive rescaling never moves the winner
        const double c = rng.uniform(1e-6, 1e3);
        auto scaled = weights;
        for (auto& w : scaled) w *= c;
        fail_if(vote(labels, scaled).first != winner, "scaling changed the winner");
    }
    return "10000 weighted votes + plurality and scale-invariance checks";
}

// ---------------------------------------------------------------------------
// 6. leakage suite
// ---------------------------------------------------------------------------

std::string criterion_leakage() {
    auto table = synth_generate(builtin_descriptor(Dataset::Dataset2), 2000, 0.35, 6006);
    std::vector<size_t> rows(table.row_count());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;

    CvConfig cfg;
    cfg.k = 10;
    cfg.seed = 60;
    cfg.smote_k = 5;
    CvEngine engine(table, rows, cfg);

    // (a) full CV with a real learner; SMOTE rows are tagged and must stay on
    // the training side of every fold.
    size_t total_synthetic = 0;
    std::vector<uint8_t> validated(table.row_count(), 0);
    for (size_t f = 0; f < engine.fold_count(); ++f) {
        const auto& fold = engine.fold(f);
        fail_if(fold.smote_rows == 0, "fixture should require oversampling");
        total_synthetic += fold.smote_rows;
        fail_if(fold.synthetic.size() != fold.X_train.n, "tag vector size mismatch");
        for (size_t i = 0; i < fold.train_rows.size(); ++i)
            fail_if(fold.synthetic[i] != 0, "an original training row carries a synthetic tag");
        for (size_t i = fold.train_rows.size(); i < fold.X_train.n; ++i)
            fail_if(fold.synthetic[i] != 1, "a generated row is missing its tag");

        fail_if(fold.X_val.n != fold.val_rows.size(), "validation matrix size mismatch");
        for (size_t row : fold.val_rows) {
            fail_if(row >= table.row_count(), "validation row is not an original table row");
            validated[row] += 1;
        }
        // evaluated rows never overlap the training rows
        std::vector<uint8_t> in_train(table.row_count(), 0);
        for (size_t row : fold.train_rows) in_train[row] = 1;
        for (size_t row : fold.val_rows)
            fail_if(in_train[row], "a validation row also appears in training");
    }
    for (size_t i = 0; i < validated.size(); ++i)
        fail_if(validated[i] != 1, "every original row must be validated exactly once");

    const auto summary = engine.run([] { return make_classifier("knn", {{"k", 5}}); }, "KNN", 1);
    fail_if(summary.folds.size() != 10, "expected ten folds");

    // (b) sentinel: a 1e6 value planted only in validation rows leaves fitted
    // normalization and encoding untouched.
    const auto folds = stratified_kfold(
        [&] {
            LabelVector y;
            const size_t target = table.descriptor.target_index();
            for (const auto& row : table.rows) y.push_back(static_cast<int>(row[target].num));
            return y;
        }(),
        cfg.k, cfg.seed);
    std::vector<size_t> val_rows = folds[0];
    std::vector<uint8_t> in_val(table.row_count(), 0);
    for (size_t row : val_rows) in_val[row] = 1;
    std::vector<size_t> train_rows;
    for (size_t i = 0; i < table.row_count(); ++i)
        if (!in_val[i]) train_rows.push_back(i);

    const auto clean = prepare_fold(table, train_rows, val_rows, cfg, 9);
    auto poisoned_table = table;
    const int bp_col = table.descriptor.column_index("RestingBP");
    const int chol_col = table.descriptor.column_index("Cholesterol");
    for (size_t row : val_rows) {
        poisoned_table.rows[row][bp_col] = Cell::number(1e6);
        poisoned_table.rows[row][chol_col] = Cell::number(1e6);
    }
    const auto poisoned = prepare_fold(poisoned_table, train_rows, val_rows, cfg, 9);
    fail_if(poisoned.normalization.min != clean.normalization.min ||
                poisoned.normalization.max != clean.normalization.max,
            "sentinel leaked into the normalization parameters");
    fail_if(poisoned.encoding.feature_names != clean.encoding.feature_names,
            "sentinel leaked into the encoding map");
    fail_if(poisoned.imputation.numeric_fill != clean.imputation.numeric_fill,
            "sentinel leaked into the imputation statistics");
    fail_if(poisoned.X_train.values != clean.X_train.values,
            "sentinel leaked into the training matrix");

    return "n=2000, k=10: " + std::to_string(total_synthetic) +
           " tagged SMOTE rows, none validated; sentinel left fits unchanged";
}

// ---------------------------------------------------------------------------
// 7. t-table anchors
// ---------------------------------------------------------------------------

std::string criterion_ttest_table() {
    const double p1 = student_t_two_sided(2.262, 9.0);
    const double p2 = student_t_two_sided(3.250, 9.0);
    fail_if(std::fabs(p1 - 0.050) > 0.001, "p(2.262, dof 9) off the table value");
    fail_if(std::fabs(p2 - 0.010) > 0.001, "p(3.250, dof 9) off the table value");

    // numeric CDF oracle: integrate the density tail with adaptive Simpson
    const auto density = [](double x, double dof) {
        const double ln = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                          0.5 * std::log(dof * 3.14159265358979323846);
        return std::exp(ln - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
    };
    std::function<double(double, double, double, double, double, double, int, double)> simpson =
        [&](double a, double b, double fa, double fb, double fm, double eps, int depth,
            double dof) -> double {
        const double m = 0.5 * (a + b);
        const double flm = density(0.5 * (a + m), dof), frm = density(0.5 * (m + b), dof);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return simpson(a, m, fa, fm, flm, eps / 2, depth - 1, dof) +
               simpson(m, b, fm, fb, frm, eps / 2, depth - 1, dof);
    };
    for (const double t : {2.262, 3.250}) {
        const double hi = t + 80.0;
        const double tail = simpson(t, hi, density(t, 9.0), density(hi, 9.0),
                                    density(0.5 * (t + hi), 9.0), 1e-14, 40, 9.0);
        const double numeric = 2.0 * tail;
        const double analytic = student_t_two_sided(t, 9.0);
        fail_if(std::fabs(numeric - analytic) > 1e-9, "incomplete-beta path diverged from quadrature");
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "p(2.262)=%.6f p(3.250)=%.6f, quadrature agrees", p1, p2);
    return buf;
}

// ---------------------------------------------------------------------------
// 8-10. dataset-scale criteria
// ---------------------------------------------------------------------------

nlohmann::json neural_model_entry(const char* kind, int epochs) {
    return nlohmann::json{{"kind", kind}, {"hyperparams", {{"epochs", epochs}, {"batch", 32}}}};
}

nlohmann::json experiment_json(int epochs, uint64_t seed) {
    nlohmann::json j;
    j["models"] = {"knn", "xgb", neural_model_entry("cnn", epochs),
                   neural_model_entry("lstm", epochs), neural_model_entry("cnn_lstm", epochs)};
    j["ensemble"] = {"cnn_lstm", "knn", "xgb"};
    j["cv"] = {{"k", 10}, {"seed", seed}};
    j["holdout"] = {{"fraction", 0.2}, {"seed", seed}};
    return j;
}

struct AblationAccuracies {
    double cnn = 0, lstm = 0, cnn_lstm = 0, hybrid = 0, best_member = 0;
    double wall_seconds = 0;
};

AblationAccuracies run_ablation(nlohmann::json j) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto bundle = run_experiment(ExperimentConfig::from_json(j));
    AblationAccuracies out;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& m : bundle.models) {
        if (m.kind == "cnn") out.cnn = m.cv.mean.accuracy;
        if (m.kind == "lstm") out.lstm = m.cv.mean.accuracy;
        if (m.kind == "cnn_lstm") out.cnn_lstm = m.cv.mean.accuracy;
        for (const auto& member : bundle.ensemble_members)
            if (m.kind == member) out.best_member = std::max(out.best_member, m.cv.mean.accuracy);
    }
    out.hybrid = bundle.ensemble_cv.mean.accuracy;
    return out;
}

std::string describe(const AblationAccuracies& a) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "cnn %.4f lstm %.4f cnn-lstm %.4f hybrid %.4f (%.0fs)", a.cnn, a.lstm,
                  a.cnn_lstm, a.hybrid, a.wall_seconds);
    return buf;
}

bool ordering_trend_holds(const AblationAccuracies& a) {
    return a.cnn_lstm >= std::max(a.cnn, a.lstm) - 0.010 && a.hybrid >= a.cnn_lstm;
}

std::string criterion_dataset2(const std::string& path) {
    auto j = experiment_json(40, 42);
    j["dataset"] = "dataset2";
    j["data_path"] = path;

    const auto first = run_ablation(j);
    fail_if(first.wall_seconds >= 1200.0, "full cross-validation exceeded 20 minutes");
    fail_if(first.hybrid < 0.85, "hybrid mean accuracy below 0.85: " + describe(first));
    fail_if(first.hybrid < first.best_member - 0.005,
            "hybrid fell more than 0.5pt below its best constituent: " + describe(first));

    int trend = ordering_trend_holds(first) ? 1 : 0;
    for (uint64_t seed : {43ull, 44ull}) {
        auto js = experiment_json(40, seed);
        js["dataset"] = "dataset2";
        js["data_path"] = path;
        trend += ordering_trend_holds(run_ablation(js)) ? 1 : 0;
    }
    fail_if(trend < 2, "ordering trend held on only " + std::to_string(trend) + "/3 seeds");
    return describe(first) + ", trend " + std::to_string(trend) + "/3 seeds";
}

void info_dataset2_analogue() {
    auto j = experiment_json(8, 42);
    j["dataset"] = "synthetic";
    j["synthetic"] = {{"n", 500}, {"class_balance", 0.55}, {"schema", "dataset2"}, {"seed", 12}};
    const auto a = run_ablation(j);
    report("INFO", "dataset2 analogue", "synthetic 918-style schema: " + describe(a) +
                                            (ordering_trend_holds(a) ? ", trend holds" : ""));
}

std::string criterion_dataset1(const std::string& path) {
    // preprocessing gate on the real file
    ExperimentConfig cfg;
    cfg.dataset = "dataset1";
    cfg.data_path = path;
    cfg.models = {{"knn", {}, {}}};
    const auto prep = prepare_report(cfg);
    const size_t retained = prep.at("rows_retained").get<size_t>();
    fail_if(retained < 60000 || retained > 64500,
            "retained " + std::to_string(retained) + " rows, outside [60000, 64500]");

    // age bounds after conversion
    auto table = load_csv(path, builtin_descriptor(Dataset::Dataset1));
    auto clean = prepare_table(table, default_prepare_options(table.descriptor), nullptr);
    const int age = clean.descriptor.column_index("age");
    for (const auto& row : clean.rows) {
        fail_if(row[age].num < 18 || row[age].num > 100, "converted age outside [18, 100]");
    }

    auto j = experiment_json(40, 42);
    j["dataset"] = "dataset1";
    j["data_path"] = path;
    j["subsample"] = 5000;
    const auto a = run_ablation(j);
    fail_if(a.wall_seconds >= 900.0, "subsampled pipeline exceeded 15 minutes");
    fail_if(a.hybrid < a.cnn_lstm - 0.010, "hybrid fell more than 1pt below cnn-lstm: " + describe(a));
    return "retained " + std::to_string(retained) + "; " + describe(a);
}

void info_dataset1_analogue() {
    // synthetic 70k-style table with planted duplicates and outliers
    auto table = synth_generate(builtin_descriptor(Dataset::Dataset1), 1200, 0.5, 77);
    Rng rng(78);
    for (int i = 0; i < 25; ++i)  // duplicates
        table.rows.push_back(table.rows[rng.index(1200)]);
    const int hi = table.descriptor.column_index("ap_hi");
    const int lo = table.descriptor.column_index("ap_lo");
    for (int i = 0; i < 30; ++i) {  // implausible pressure readings
        auto row = table.rows[rng.index(1200)];
        row[hi] = Cell::number(i % 2 ? 16020.0 : 1.0);
        table.rows.push_back(row);
    }
    for (int i = 0; i < 10; ++i) {  // swapped readings
        auto row = table.rows[rng.index(1200)];
        std::swap(row[hi], row[lo]);
        table.rows.push_back(row);
    }

    PrepareReport rep;
    auto clean = prepare_table(table, default_prepare_options(table.descriptor), &rep);
    const int age = clean.descriptor.column_index("age");
    bool ages_ok = true;
    for (const auto& row : clean.rows)
        ages_ok = ages_ok && row[age].num >= 18 && row[age].num <= 100;

    const auto path = fs::temp_directory_path() / "hycard_analogue_d1.csv";
    write_csv(table, path.string());
    auto j = experiment_json(8, 42);
    j["dataset"] = "dataset1";
    j["data_path"] = path.string();
    j["subsample"] = 700;
    j["cv"] = {{"k", 5}, {"seed", 42}};
    const auto a = run_ablation(j);
    fs::remove(path);

    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "planted dirt: %zu dupes + %zu outliers removed, ages %s; %s", rep.duplicates_removed,
                  rep.outliers_removed, ages_ok ? "in [18,100]" : "OUT OF RANGE",
                  describe(a).c_str());
    report("INFO", "dataset1 analogue", buf);
}

std::string criterion_determinism(const std::string& dataset2_path) {
    nlohmann::json j;
    if (!dataset2_path.empty()) {
        j = experiment_json(40, 42);
        j["dataset"] = "dataset2";
        j["data_path"] = dataset2_path;
    } else {
        j = experiment_json(6, 42);
        j["dataset"] = "synthetic";
        j["synthetic"] = {{"n", 400}, {"class_balance", 0.5}, {"schema", "dataset2"}, {"seed", 10}};
        j["cv"] = {{"k", 5}, {"seed", 42}};
    }
    j["emit_votes"] = true;

    const auto dir_a = fs::temp_directory_path() / "hycard_det_a";
    const auto dir_b = fs::temp_directory_path() / "hycard_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    write_bundle(run_experiment(ExperimentConfig::from_json(j)), dir_a.string(), "both");
    write_bundle(run_experiment(ExperimentConfig::from_json(j)), dir_b.string(), "both");

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    const std::string a = slurp(dir_a / "bundle.json");
    const std::string b = slurp(dir_b / "bundle.json");
    fail_if(a.empty(), "first run produced an empty bundle");
    fail_if(a != b, "bundle.json differs between identical runs");
    const std::string votes_a = slurp(dir_a / "votes.jsonl");
    const std::string votes_b = slurp(dir_b / "votes.jsonl");
    fail_if(votes_a != votes_b, "votes.jsonl differs between identical runs");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    return "two end-to-end runs, " + std::to_string(a.size()) + "-byte bundles byte-identical" +
           (dataset2_path.empty() ? " (synthetic config)" : " (dataset2)");
}

}  // namespace

int main() {
    std::printf("acceptance suite (threads: %zu)\n", resolve_threads());

    run_criterion("metrics oracle", criterion_metrics_oracle);
    run_criterion("gradient fidelity", criterion_gradient_fidelity);
    run_criterion("knn oracle", criterion_knn_oracle);
    run_criterion("gbt hand check", criterion_gbt_hand_check);
    run_criterion("weighted voting", criterion_voting);
    run_criterion("leakage suite", criterion_leakage);
    run_criterion("t-test table", criterion_ttest_table);

    const std::string d2 = find_dataset_file("HYCARD_DATASET2_CSV", "heart.csv");
    if (!d2.empty()) {
        run_criterion("dataset2 reproduction", [&] { return criterion_dataset2(d2); });
    } else {
        report("SKIP", "dataset2 reproduction",
               "918-row public file not present (data/heart.csv or HYCARD_DATASET2_CSV)");
        info_dataset2_analogue();
    }

    const std::string d1 = find_dataset_file("HYCARD_DATASET1_CSV", "cardio_train.csv");
    if (!d1.empty()) {
        run_criterion("dataset1 preprocessing", [&] { return criterion_dataset1(d1); });
    } else {
        report("SKIP", "dataset1 preprocessing",
               "70000-row public file not present (data/cardio_train.csv or HYCARD_DATASET1_CSV)");
        info_dataset1_analogue();
    }

    run_criterion("determinism", [&] { return criterion_determinism(d2); });

    std::printf("%s (%d failure%s)\n", g_failures == 0 ? "acceptance suite: OK" : "acceptance suite: FAILED",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
