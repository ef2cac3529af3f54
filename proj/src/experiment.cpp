#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace hycard {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

std::string display_name(const std::string& kind) {
    if (kind == "nb") return "NB";
    if (kind == "lr") return "LR";
    if (kind == "dt") return "DT";
    if (kind == "knn") return "KNN";
    if (kind == "xgb") return "XGB";
    if (kind == "cnn") return "CNN";
    if (kind == "lstm") return "LSTM";
    if (kind == "cnn_lstm") return "CNN-LSTM";
    if (kind == "hybrid") return "Hybrid";
    return kind;
}

const std::vector<std::string> kDefaultEnsembleMembers = {"cnn_lstm", "knn", "xgb"};

namespace {

ModelConfig plain_model(const std::string& kind) {
    ModelConfig m;
    m.kind = kind;
    if (kind == "cnn" || kind == "lstm" || kind == "cnn_lstm")
        m.hyperparams = ojson{{"epochs", 40}};
    return m;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<ModelConfig> default_model_set() {
    std::vector<ModelConfig> models;
    for (const char* kind : {"nb", "lr", "dt", "knn", "xgb", "cnn", "lstm", "cnn_lstm"})
        models.push_back(plain_model(kind));
    return models;
}

std::vector<ModelConfig> ablation_model_set() {
    std::vector<ModelConfig> models;
    for (const char* kind : {"knn", "xgb", "cnn", "lstm", "cnn_lstm"})
        models.push_back(plain_model(kind));
    return models;
}

void ExperimentConfig::validate() const {
    if (dataset != "dataset1" && dataset != "dataset2" && dataset != "synthetic" &&
        dataset != "custom")
        throw ConfigError("config: dataset must be dataset1, dataset2, synthetic, or custom");
    if (dataset == "custom") {
        if (data_path.empty()) throw ConfigError("config: data_path is required for custom datasets");
        if (custom_schema != "dataset1" && custom_schema != "dataset2")
            throw ConfigError("config: schema must be dataset1 or dataset2 for custom datasets");
    }
    if (dataset == "synthetic") {
        if (synthetic.n < 1) throw ConfigError("config: synthetic.n must be >= 1");
        if (synthetic.class_balance < 0.0 || synthetic.class_balance > 1.0)
            throw ConfigError("config: synthetic.class_balance must lie in [0, 1]");
        if (synthetic.schema != "dataset1" && synthetic.schema != "dataset2")
            throw ConfigError("config: synthetic.schema must be dataset1 or dataset2");
    }
    if (models.empty()) throw ConfigError("config: models must not be empty");
    for (size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        if (std::find(kClassifierKinds.begin(), kClassifierKinds.end(), m.kind) ==
            kClassifierKinds.end())
            throw ConfigError("config: models[" + std::to_string(i) + "].kind '" + m.kind +
                              "' is unknown");
        for (size_t j = 0; j < i; ++j)
            if (models[j].kind == m.kind)
                throw ConfigError("config: models: duplicate kind '" + m.kind + "'");
    }
    for (const auto& member : ensemble_members) {
        bool found = false;
        for (const auto& m : models)
            if (m.kind == member) found = true;
        if (!found)
            throw ConfigError("config: ensemble member '" + member +
                              "' is not among the declared models");
    }
    if (cv_k < 2) throw ConfigError("config: cv.k must be >= 2");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ConfigError("config: holdout.fraction must lie in (0, 1)");
    if (smote_k < 1) throw ConfigError("config: smote.k must be >= 1");
    if (subsample && *subsample < 4) throw ConfigError("config: subsample must be >= 4");
    if (format != "markdown" && format != "csv" && format != "both")
        throw ConfigError("config: format must be markdown, csv, or both");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top-level value must be a JSON object");
    static const std::vector<std::string> known = {
        "dataset", "data_path", "schema",     "synthetic",     "subsample", "seed",
        "models",  "ensemble",  "cv",         "holdout",       "outlier_rules",
        "smote",   "output_dir", "emit_votes", "format"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("config: unknown field '" + it.key() + "'");

    ExperimentConfig cfg;
    try {
        cfg.dataset = j.value("dataset", std::string("synthetic"));
        cfg.data_path = j.value("data_path", std::string());
        cfg.custom_schema = j.value("schema", std::string());

        if (j.contains("seed")) {
            const uint64_t seed = j.at("seed").get<uint64_t>();
            cfg.cv_seed = seed;
            cfg.holdout_seed = seed;
            cfg.synthetic.seed = seed;
        }
        if (j.contains("synthetic")) {
            const auto& s = j.at("synthetic");
            cfg.synthetic.n = s.value("n", cfg.synthetic.n);
            cfg.synthetic.class_balance = s.value("class_balance", cfg.synthetic.class_balance);
            cfg.synthetic.seed = s.value("seed", cfg.synthetic.seed);
            cfg.synthetic.schema = s.value("schema", cfg.synthetic.schema);
        }
        if (j.contains("subsample") && !j.at("subsample").is_null())
            cfg.subsample = j.at("subsample").get<size_t>();

        if (j.contains("models")) {
            for (const auto& jm : j.at("models")) {
                ModelConfig m;
                if (jm.is_string()) {
                    m.kind = jm.get<std::string>();
                } else if (jm.is_object()) {
                    if (!jm.contains("kind"))
                        throw ConfigError("config: every model entry needs a 'kind'");
                    m.kind = jm.at("kind").get<std::string>();
                    if (jm.contains("hyperparams")) m.hyperparams = jm.at("hyperparams");
                    if (jm.contains("grid")) {
                        if (jm.at("grid").is_string()) {
                            if (jm.at("grid").get<std::string>() != "default")
                                throw ConfigError("config: models." + m.kind +
                                                  ".grid must be an object or \"default\"");
                            m.grid = default_grid(m.kind);
                        } else {
                            m.grid = jm.at("grid");
                        }
                    }
                } else {
                    throw ConfigError("config: model entries must be kind strings or objects");
                }
                cfg.models.push_back(std::move(m));
            }
        } else {
            cfg.models = default_model_set();
        }

        if (j.contains("ensemble")) {
            if (j.at("ensemble").is_array())
                cfg.ensemble_members = j.at("ensemble").get<std::vector<std::string>>();
            else if (j.at("ensemble").is_object() && j.at("ensemble").contains("members"))
                cfg.ensemble_members =
                    j.at("ensemble").at("members").get<std::vector<std::string>>();
            else
                throw ConfigError("config: ensemble must be a member array or {\"members\": [...]}");
        } else {
            for (const auto& member : kDefaultEnsembleMembers)
                for (const auto& m : cfg.models)
                    if (m.kind == member) cfg.ensemble_members.push_back(member);
        }

        if (j.contains("cv")) {
            cfg.cv_k = j.at("cv").value("k", cfg.cv_k);
            cfg.cv_seed = j.at("cv").value("seed", cfg.cv_seed);
        }
        if (j.contains("holdout")) {
            cfg.holdout_fraction = j.at("holdout").value("fraction", cfg.holdout_fraction);
            cfg.holdout_seed = j.at("holdout").value("seed", cfg.holdout_seed);
        }
        if (j.contains("outlier_rules") && !j.at("outlier_rules").is_null())
            cfg.outlier_rules = OutlierRules::from_json(j.at("outlier_rules").dump());
        if (j.contains("smote")) {
            cfg.smote_k = j.at("smote").value("k", cfg.smote_k);
            cfg.smote_enabled = j.at("smote").value("enabled", cfg.smote_enabled);
        }
        cfg.output_dir = j.value("output_dir", std::string());
        cfg.emit_votes = j.value("emit_votes", false);
        cfg.format = j.value("format", std::string("both"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ojson ExperimentConfig::to_json() const {
    ojson j;
    j["dataset"] = dataset;
    if (!data_path.empty()) j["data_path"] = data_path;
    if (dataset == "custom") j["schema"] = custom_schema;
    if (dataset == "synthetic")
        j["synthetic"] = ojson{{"n", synthetic.n},
                               {"class_balance", synthetic.class_balance},
                               {"seed", synthetic.seed},
                               {"schema", synthetic.schema}};
    if (subsample) j["subsample"] = *subsample;
    j["models"] = ojson::array();
    for (const auto& m : models) {
        ojson jm;
        jm["kind"] = m.kind;
        if (!m.hyperparams.is_null()) jm["hyperparams"] = m.hyperparams;
        if (!m.grid.is_null()) jm["grid"] = m.grid;
        j["models"].push_back(jm);
    }
    j["ensemble"] = ensemble_members;
    j["cv"] = ojson{{"k", cv_k}, {"seed", cv_seed}};
    j["holdout"] = ojson{{"fraction", holdout_fraction}, {"seed", holdout_seed}};
    if (outlier_rules) j["outlier_rules"] = ojson::parse(outlier_rules->to_json());
    j["smote"] = ojson{{"k", smote_k}, {"enabled", smote_enabled}};
    if (!output_dir.empty()) j["output_dir"] = output_dir;
    j["emit_votes"] = emit_votes;
    j["format"] = format;
    return j;
}

// ---------------------------------------------------------------------------
// Dataset resolution
// ---------------------------------------------------------------------------

namespace {

std::string resolve_data_path(const ExperimentConfig& cfg) {
    if (!cfg.data_path.empty()) return cfg.data_path;
    const char* env_name =
        cfg.dataset == "dataset1" ? "HYCARD_DATASET1_CSV" : "HYCARD_DATASET2_CSV";
    if (const char* env = std::getenv(env_name)) return env;
    return cfg.dataset == "dataset1" ? "data/cardio_train.csv" : "data/heart.csv";
}

RawTable load_dataset(const ExperimentConfig& cfg, std::string* label) {
    if (cfg.dataset == "synthetic") {
        *label = "synthetic(" + cfg.synthetic.schema + ")";
        return synth_generate(descriptor_by_name(cfg.synthetic.schema), cfg.synthetic.n,
                              cfg.synthetic.class_balance, cfg.synthetic.seed);
    }
    if (cfg.dataset == "custom") {
        *label = "custom(" + cfg.custom_schema + ")";
        if (!fs::exists(cfg.data_path)) throw DataError("dataset file not found: " + cfg.data_path);
        return load_csv(cfg.data_path, descriptor_by_name(cfg.custom_schema));
    }
    *label = cfg.dataset;
    const std::string path = resolve_data_path(cfg);
    if (!fs::exists(path))
        throw DataError("dataset file not found: " + path +
                        " (set data_path in the config or the HYCARD_DATASET" +
                        (cfg.dataset == "dataset1" ? std::string("1") : std::string("2")) +
                        "_CSV environment variable)");
    return load_csv(path, descriptor_by_name(cfg.dataset));
}

std::vector<size_t> stratified_subsample(const LabelVector& y, size_t want, uint64_t seed) {
    std::vector<size_t> by_class[2];
    for (size_t i = 0; i < y.size(); ++i) by_class[y[i] ? 1 : 0].push_back(i);
    const double frac = static_cast<double>(want) / static_cast<double>(y.size());
    size_t take1 =
        static_cast<size_t>(std::llround(frac * static_cast<double>(by_class[1].size())));
    take1 = std::min(take1, by_class[1].size());
    size_t take0 = want > take1 ? want - take1 : 0;
    if (take0 > by_class[0].size()) {
        take1 = std::min(by_class[1].size(), take1 + (take0 - by_class[0].size()));
        take0 = by_class[0].size();
    }
    std::vector<size_t> out;
    out.reserve(take0 + take1);
    for (int c = 0; c < 2; ++c) {
        Rng rng(derive_seed(seed, 0x5ab5a3ull, static_cast<uint64_t>(c)));
        rng.shuffle(by_class[c]);
        const size_t take = c == 0 ? take0 : take1;
        for (size_t i = 0; i < take; ++i) out.push_back(by_class[c][i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ojson metrics_to_json(const MetricsReport& r) {
    ojson j;
    j["accuracy"] = r.accuracy;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["specificity"] = r.specificity;
    ojson flags;
    flags["precision"] = r.precision_degenerate;
    flags["recall"] = r.recall_degenerate;
    flags["f1"] = r.f1_degenerate;
    flags["specificity"] = r.specificity_degenerate;
    j["degenerate"] = flags;
    return j;
}

ojson moments_to_json(const MetricMoments& m) {
    return ojson{{"accuracy", m.accuracy},
                 {"precision", m.precision},
                 {"recall", m.recall},
                 {"f1", m.f1},
                 {"specificity", m.specificity}};
}

ojson cv_to_json(const CVSummary& s) {
    ojson j;
    j["folds"] = ojson::array();
    for (const auto& r : s.folds) j["folds"].push_back(metrics_to_json(r));
    j["mean"] = moments_to_json(s.mean);
    j["std"] = moments_to_json(s.stddev);
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bundle JSON
// ---------------------------------------------------------------------------

ojson ReportBundle::to_json() const {
    ojson j;
    j["dataset"] = ojson{{"name", dataset.name},
                         {"rows_loaded", dataset.rows_loaded},
                         {"missing_target_dropped", dataset.prepare.missing_target_dropped},
                         {"duplicates_removed", dataset.prepare.duplicates_removed},
                         {"outliers_removed", dataset.prepare.outliers_removed},
                         {"rows_retained", dataset.prepare.rows_out},
                         {"rows_used", dataset.rows_used},
                         {"train_rows", dataset.train_rows},
                         {"holdout_rows", dataset.holdout_rows}};
    if (dataset.subsample) j["dataset"]["subsample"] = *dataset.subsample;
    j["config"] = config_echo;
    j["models"] = ojson::array();
    for (const auto& m : models) {
        ojson jm;
        jm["kind"] = m.kind;
        jm["display"] = m.display;
        jm["name"] = m.full_name;
        jm["hyperparams"] = m.hyperparams.is_null() ? ojson::object() : m.hyperparams;
        if (!m.grid_cells.empty()) {
            ojson cells = ojson::array();
            for (const auto& cell : m.grid_cells)
                cells.push_back(
                    ojson{{"hyperparams", cell.hyperparams}, {"mean_accuracy", cell.mean_accuracy}});
            jm["grid"] = cells;
        }
        if (m.params) jm["params"] = *m.params;
        jm["cv"] = cv_to_json(m.cv);
        jm["holdout"] = metrics_to_json(m.holdout);
        j["models"].push_back(jm);
    }
    ojson je;
    je["members"] = ensemble_members;
    je["weights"] = ensemble_weights;
    if (ensemble_params) je["params"] = *ensemble_params;
    je["cv"] = cv_to_json(ensemble_cv);
    je["holdout"] = metrics_to_json(ensemble_holdout);
    j["ensemble"] = je;
    j["strongest_baseline"] = strongest_baseline;
    j["ttests"] = ojson::array();
    for (const auto& row : ttests) {
        ojson jt;
        jt["model"] = row.model;
        jt["vs"] = row.versus;
        if (row.ok) {
            jt["t"] = row.result.t;
            jt["dof"] = row.result.dof;
            jt["p"] = row.result.p;
        } else {
            jt["error"] = row.note;
        }
        j["ttests"].push_back(jt);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

ReportBundle run_experiment(const ExperimentConfig& config) {
    config.validate();
    ReportBundle bundle;
    bundle.config_echo = config.to_json();

    RawTable raw = load_dataset(config, &bundle.dataset.name);
    bundle.dataset.rows_loaded = raw.row_count();

    PrepareOptions prep = default_prepare_options(raw.descriptor);
    if (config.outlier_rules) prep.rules = *config.outlier_rules;
    RawTable table = prepare_table(raw, prep, &bundle.dataset.prepare);
    raw.rows.clear();
    raw.rows.shrink_to_fit();

    const size_t target = table.descriptor.target_index();
    LabelVector y_all(table.row_count());
    for (size_t i = 0; i < table.row_count(); ++i)
        y_all[i] = static_cast<int>(table.rows[i][target].num);

    std::vector<size_t> rows(table.row_count());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    if (config.subsample && *config.subsample < rows.size()) {
        rows = stratified_subsample(y_all, *config.subsample,
                                    derive_seed(config.cv_seed, 0x5ab5ull));
        bundle.dataset.subsample = *config.subsample;
    }
    bundle.dataset.rows_used = rows.size();

    LabelVector y_rows(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) y_rows[i] = y_all[rows[i]];
    auto [train_local, test_local] =
        split_holdout(rows.size(), config.holdout_fraction, config.holdout_seed, y_rows);
    std::vector<size_t> train_rows(train_local.size()), test_rows(test_local.size());
    for (size_t i = 0; i < train_local.size(); ++i) train_rows[i] = rows[train_local[i]];
    for (size_t i = 0; i < test_local.size(); ++i) test_rows[i] = rows[test_local[i]];
    bundle.dataset.train_rows = train_rows.size();
    bundle.dataset.holdout_rows = test_rows.size();
    bundle.holdout_row_indices = test_rows;

    CvConfig cvc;
    cvc.k = config.cv_k;
    cvc.seed = config.cv_seed;
    cvc.smote_k = config.smote_k;
    cvc.smote = config.smote_enabled;
    CvEngine engine(table, train_rows, cvc);

    // Per-model cross-validation on the shared folds; grid search first when
    // requested.
    std::vector<std::vector<FoldOutcome>> outcomes(config.models.size());
    for (size_t mi = 0; mi < config.models.size(); ++mi) {
        const ModelConfig& mc = config.models[mi];
        const uint64_t model_seed = fnv1a(mc.kind);

        ModelResult result;
        result.kind = mc.kind;
        result.display = display_name(mc.kind);
        result.hyperparams = mc.hyperparams.is_null() ? ojson::object() : mc.hyperparams;
        if (!mc.grid.is_null()) {
            GridResult gr = grid_search(mc.kind, mc.grid, result.hyperparams, engine, model_seed);
            result.grid_cells = gr.cells;
            for (auto it = gr.best.begin(); it != gr.best.end(); ++it)
                result.hyperparams[it.key()] = it.value();
        }

        const ojson hp = result.hyperparams;
        auto factory = [&mc, hp] { return make_classifier(mc.kind, hp); };
        result.full_name = factory()->name();
        result.cv = engine.run(factory, result.display, model_seed, &outcomes[mi]);
        auto [sec_mean, sec_std] = mean_std(result.cv.fold_seconds);
        (void)sec_std;
        result.mean_fit_seconds = sec_mean;
        bundle.models.push_back(std::move(result));
    }

    // Ensemble cross-validation: fold f votes with weights derived from the
    // members' mean validation accuracy over the other folds.
    std::vector<size_t> member_idx;
    for (const auto& member : config.ensemble_members)
        for (size_t mi = 0; mi < config.models.size(); ++mi)
            if (config.models[mi].kind == member) member_idx.push_back(mi);
    bundle.ensemble_members = config.ensemble_members;

    const size_t k = engine.fold_count();
    if (!member_idx.empty()) {
        std::vector<FoldOutcome> ens_outcomes(k);
        for (size_t f = 0; f < k; ++f) {
            std::vector<double> accs;
            for (size_t mi : member_idx) {
                double sum = 0.0;
                for (size_t g = 0; g < k; ++g)
                    if (g != f) sum += outcomes[mi][g].report.accuracy;
                accs.push_back(sum / static_cast<double>(k - 1));
            }
            const auto weights = compute_weights(accs);
            std::vector<std::vector<int>> preds;
            for (size_t mi : member_idx) preds.push_back(outcomes[mi][f].y_pred);
            FoldOutcome& out = ens_outcomes[f];
            out.val_rows = outcomes[member_idx.front()][f].val_rows;
            out.y_true = outcomes[member_idx.front()][f].y_true;
            out.y_pred = vote_rows(preds, weights);
            out.report = metrics(confusion(out.y_true, out.y_pred));
            for (size_t mi : member_idx) out.fit_seconds += outcomes[mi][f].fit_seconds;
        }
        bundle.ensemble_cv = CVSummary::aggregate("Hybrid", ens_outcomes);
        auto [sec_mean, sec_std] = mean_std(bundle.ensemble_cv.fold_seconds);
        (void)sec_std;
        bundle.ensemble_mean_fit_seconds = sec_mean;
    }

    // Holdout: refit on the full training split, score the untouched 20% once.
    FoldData holdout =
        prepare_fold(table, train_rows, test_rows, cvc, derive_seed(config.cv_seed, 0x401dull));
    std::vector<std::vector<int>> holdout_preds(config.models.size());
    for (size_t mi = 0; mi < config.models.size(); ++mi) {
        auto clf = make_classifier(config.models[mi].kind, bundle.models[mi].hyperparams);
        clf->fit(holdout.X_train, holdout.y_train,
                 derive_seed(config.cv_seed, fnv1a(config.models[mi].kind), k));
        holdout_preds[mi] = clf->predict(holdout.X_val);
        bundle.models[mi].holdout = metrics(confusion(holdout.y_val, holdout_preds[mi]));
        bundle.models[mi].params = clf->parameter_count();
    }

    if (!member_idx.empty()) {
        std::vector<double> member_mean_acc;
        for (size_t mi : member_idx) member_mean_acc.push_back(bundle.models[mi].cv.mean.accuracy);
        bundle.ensemble_weights = compute_weights(member_mean_acc);

        std::vector<std::vector<int>> preds;
        for (size_t mi : member_idx) preds.push_back(holdout_preds[mi]);
        std::vector<VoteTrace> traces;
        auto votes =
            vote_rows(preds, bundle.ensemble_weights, config.emit_votes ? &traces : nullptr);
        bundle.ensemble_holdout = metrics(confusion(holdout.y_val, votes));
        bundle.holdout_votes = std::move(traces);

        long long params = 0;
        bool any = false;
        for (size_t mi : member_idx)
            if (bundle.models[mi].params) {
                params += *bundle.models[mi].params;
                any = true;
            }
        if (any) bundle.ensemble_params = params;
    }

    // Strongest single model by mean CV accuracy, then pairwise tests.
    size_t strongest = 0;
    for (size_t mi = 1; mi < bundle.models.size(); ++mi)
        if (bundle.models[mi].cv.mean.accuracy > bundle.models[strongest].cv.mean.accuracy)
            strongest = mi;
    bundle.strongest_baseline = bundle.models[strongest].display;

    const auto baseline_folds = bundle.models[strongest].cv.fold_metric("accuracy");
    auto add_ttest = [&](const std::string& name, const std::vector<double>& folds) {
        TTestRow row;
        row.model = name;
        row.versus = bundle.strongest_baseline;
        try {
            row.result = paired_t_test(folds, baseline_folds);
        } catch (const Error& e) {
            row.ok = false;
            row.note = e.what();
        }
        bundle.ttests.push_back(std::move(row));
    };
    for (size_t mi = 0; mi < bundle.models.size(); ++mi) {
        if (mi == strongest) continue;
        add_ttest(bundle.models[mi].display, bundle.models[mi].cv.fold_metric("accuracy"));
    }
    if (!member_idx.empty()) add_ttest("Hybrid", bundle.ensemble_cv.fold_metric("accuracy"));

    return bundle;
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

std::string format_mean_std_pct(double mean, double stddev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", mean * 100.0, stddev * 100.0);
    return buf;
}

namespace {

std::string format_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

std::string format_seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct TableRow {
    std::string name;
    const CVSummary* cv;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

const char* kTableMetrics[4] = {"accuracy", "recall", "f1", "precision"};
const char* kTableHeaders[4] = {"Accuracy (std)", "Recall (std)", "F1 (std)", "Precision (std)"};

std::string comparison_markdown(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "| Model |";
    for (const char* h : kTableHeaders) os << ' ' << h << " |";
    os << "\n|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        os << "| " << row.name << " |";
        for (const char* m : kTableMetrics)
            os << ' ' << format_mean_std_pct(row.cv->mean.by_name(m), row.cv->stddev.by_name(m))
               << " |";
        os << "\n";
    }
    return os.str();
}

std::string comparison_csv(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "Model,Accuracy,Accuracy_std,Recall,Recall_std,F1,F1_std,Precision,Precision_std\n";
    for (const auto& row : rows) {
        os << row.name;
        for (const char* m : kTableMetrics)
            os << ',' << format_pct(row.cv->mean.by_name(m)) << ','
               << format_pct(row.cv->stddev.by_name(m));
        os << "\n";
    }
    return os.str();
}

std::vector<TableRow> ablation_rows(const ReportBundle& bundle) {
    std::vector<TableRow> rows;
    for (const char* kind : {"cnn", "lstm", "cnn_lstm"})
        for (const auto& m : bundle.models)
            if (m.kind == kind) rows.push_back({m.display, &m.cv});
    if (!bundle.ensemble_members.empty()) rows.push_back({"Hybrid", &bundle.ensemble_cv});
    return rows;
}

std::string ablation_markdown(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "| Configuration | Accuracy (std) |\n|---|---|\n";
    for (const auto& row : rows)
        os << "| " << row.name << " | "
           << format_mean_std_pct(row.cv->mean.accuracy, row.cv->stddev.accuracy) << " |\n";
    return os.str();
}

std::string ablation_csv(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "Configuration,Accuracy,Accuracy_std\n";
    for (const auto& row : rows)
        os << row.name << ',' << format_pct(row.cv->mean.accuracy) << ','
           << format_pct(row.cv->stddev.accuracy) << "\n";
    return os.str();
}

struct CostRow {
    std::string name;
    std::optional<long long> params;
    double seconds;
};

std::vector<CostRow> cost_rows(const ReportBundle& bundle) {
    std::vector<CostRow> rows;
    for (const auto& m : bundle.models) rows.push_back({m.display, m.params, m.mean_fit_seconds});
    if (!bundle.ensemble_members.empty())
        rows.push_back({"Hybrid", bundle.ensemble_params, bundle.ensemble_mean_fit_seconds});
    return rows;
}

std::string cost_markdown(const std::vector<CostRow>& rows) {
    std::ostringstream os;
    os << "| Model | Params | Train time (s) |\n|---|---|---|\n";
    for (const auto& row : rows) {
        os << "| " << row.name << " | ";
        if (row.params)
            os << *row.params;
        else
            os << "--";
        os << " | " << format_seconds(row.seconds) << " |\n";
    }
    return os.str();
}

std::string cost_csv(const std::vector<CostRow>& rows) {
    std::ostringstream os;
    os << "Model,Params,Train_time_s\n";
    for (const auto& row : rows) {
        os << row.name << ',';
        if (row.params) os << *row.params;
        os << ',' << format_seconds(row.seconds) << "\n";
    }
    return os.str();
}

}  // namespace

void write_bundle(const ReportBundle& bundle, const std::string& out_dir,
                  const std::string& format) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory: " + out_dir);

    write_text(dir / "bundle.json", bundle.to_json().dump(2) + "\n");

    std::vector<TableRow> comparison;
    for (const auto& m : bundle.models) comparison.push_back({m.display, &m.cv});
    if (!bundle.ensemble_members.empty()) comparison.push_back({"Hybrid", &bundle.ensemble_cv});
    const auto ablation = ablation_rows(bundle);
    const auto costs = cost_rows(bundle);

    const bool md = format == "markdown" || format == "both";
    const bool csv = format == "csv" || format == "both";
    if (md) {
        write_text(dir / "comparison.md", comparison_markdown(comparison));
        write_text(dir / "ablation.md", ablation_markdown(ablation));
        write_text(dir / "cost.md", cost_markdown(costs));
    }
    if (csv) {
        write_text(dir / "comparison.csv", comparison_csv(comparison));
        write_text(dir / "ablation.csv", ablation_csv(ablation));
        write_text(dir / "cost.csv", cost_csv(costs));
    }

    ojson timings;
    timings["models"] = ojson::object();
    double total = 0.0;
    for (const auto& m : bundle.models) {
        timings["models"][m.display] =
            ojson{{"fold_seconds", m.cv.fold_seconds}, {"mean", m.mean_fit_seconds}};
        for (double s : m.cv.fold_seconds) total += s;
    }
    timings["hybrid_mean"] = bundle.ensemble_mean_fit_seconds;
    timings["total_fit_seconds"] = total;
    write_text(dir / "timings.json", timings.dump(2) + "\n");

    if (!bundle.holdout_votes.empty()) {
        std::ostringstream os;
        for (size_t i = 0; i < bundle.holdout_votes.size(); ++i) {
            ojson out;
            out["row"] = bundle.holdout_row_indices[i];
            ojson trace = bundle.holdout_votes[i].to_json();
            for (auto it = trace.begin(); it != trace.end(); ++it) out[it.key()] = it.value();
            os << out.dump() << "\n";
        }
        write_text(dir / "votes.jsonl", os.str());
    }
}

// ---------------------------------------------------------------------------
// Cost profile
// ---------------------------------------------------------------------------

nlohmann::ordered_json cost_profile(const ExperimentConfig& config) {
    config.validate();
    std::string label;
    RawTable raw = load_dataset(config, &label);

    PrepareOptions prep = default_prepare_options(raw.descriptor);
    if (config.outlier_rules) prep.rules = *config.outlier_rules;
    RawTable table = prepare_table(raw, prep, nullptr);

    LabelVector y(table.row_count());
    const size_t target = table.descriptor.target_index();
    for (size_t i = 0; i < table.row_count(); ++i)
        y[i] = static_cast<int>(table.rows[i][target].num);

    std::vector<size_t> rows(table.row_count());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    if (config.subsample && *config.subsample < rows.size())
        rows = stratified_subsample(y, *config.subsample, derive_seed(config.cv_seed, 0x5ab5ull));

    CvConfig cvc;
    cvc.k = config.cv_k;
    cvc.seed = config.cv_seed;
    cvc.smote_k = config.smote_k;
    cvc.smote = config.smote_enabled;
    CvEngine engine(table, rows, cvc);

    ojson out;
    out["dataset"] = label;
    out["rows"] = rows.size();
    out["folds"] = engine.fold_count();
    out["models"] = ojson::array();

    long long ensemble_params = 0;
    bool ensemble_any = false;
    double ensemble_seconds = 0.0;

    for (const auto& mc : config.models) {
        const uint64_t model_seed = fnv1a(mc.kind);
        const ojson hp = mc.hyperparams.is_null() ? ojson::object() : mc.hyperparams;
        CVSummary summary = engine.run([&mc, hp] { return make_classifier(mc.kind, hp); },
                                       display_name(mc.kind), model_seed);
        auto [sec_mean, sec_std] = mean_std(summary.fold_seconds);
        (void)sec_std;

        std::optional<long long> params;
        auto probe = make_classifier(mc.kind, hp);
        if (probe->parameter_count()) {
            params = probe->parameter_count();
        } else if (mc.kind == "xgb") {
            probe->fit(engine.fold(0).X_train, engine.fold(0).y_train, model_seed);
            params = probe->parameter_count();
        }

        ojson jm;
        jm["model"] = display_name(mc.kind);
        if (params)
            jm["params"] = *params;
        else
            jm["params"] = nullptr;
        jm["mean_fit_seconds"] = sec_mean;
        jm["fold_seconds"] = summary.fold_seconds;
        out["models"].push_back(jm);

        const bool member =
            std::find(config.ensemble_members.begin(), config.ensemble_members.end(), mc.kind) !=
            config.ensemble_members.end();
        if (member) {
            ensemble_seconds += sec_mean;
            if (params) {
                ensemble_params += *params;
                ensemble_any = true;
            }
        }
    }
    if (!config.ensemble_members.empty()) {
        ojson jm;
        jm["model"] = "Hybrid";
        if (ensemble_any)
            jm["params"] = ensemble_params;
        else
            jm["params"] = nullptr;
        jm["mean_fit_seconds"] = ensemble_seconds;
        out["models"].push_back(jm);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prepare report
// ---------------------------------------------------------------------------

nlohmann::ordered_json prepare_report(const ExperimentConfig& config,
                                      const std::string& cleaned_csv_path) {
    std::string label;
    RawTable raw = load_dataset(config, &label);
    PrepareOptions prep = default_prepare_options(raw.descriptor);
    if (config.outlier_rules) prep.rules = *config.outlier_rules;
    PrepareReport rep;
    RawTable clean = prepare_table(raw, prep, &rep);

    ojson j;
    j["dataset"] = label;
    j["rows_loaded"] = rep.rows_in;
    j["missing_target_dropped"] = rep.missing_target_dropped;
    j["duplicates_removed"] = rep.duplicates_removed;
    j["outliers_removed"] = rep.outliers_removed;
    j["rows_retained"] = rep.rows_out;
    j["age_converted_to_years"] = prep.convert_age_days;
    j["bp_category_added"] = prep.add_bp_category;
    j["outlier_rules"] = ojson::parse(prep.rules.empty() ? std::string("{}") : prep.rules.to_json());
    if (!cleaned_csv_path.empty()) {
        write_csv(clean, cleaned_csv_path);
        j["cleaned_csv"] = cleaned_csv_path;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Bundle-vs-bundle t-tests
// ---------------------------------------------------------------------------

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
}

std::vector<double> bundle_fold_metric(const nlohmann::json& bundle, const std::string& model,
                                       const std::string& metric) {
    auto collect = [&](const nlohmann::json& cv) {
        std::vector<double> out;
        for (const auto& fold : cv.at("folds")) out.push_back(fold.at(metric).get<double>());
        return out;
    };
    try {
        if (model == "Hybrid") return collect(bundle.at("ensemble").at("cv"));
        for (const auto& jm : bundle.at("models"))
            if (jm.at("display").get<std::string>() == model) return collect(jm.at("cv"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed bundle: ") + e.what());
    }
    throw DataError("model '" + model + "' not present in bundle");
}

std::vector<std::string> bundle_model_names(const nlohmann::json& bundle) {
    std::vector<std::string> names;
    try {
        for (const auto& jm : bundle.at("models"))
            names.push_back(jm.at("display").get<std::string>());
        if (bundle.contains("ensemble") && !bundle.at("ensemble").at("members").empty())
            names.push_back("Hybrid");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed bundle: ") + e.what());
    }
    return names;
}

}  // namespace

nlohmann::ordered_json ttest_bundles(const std::string& bundle_a_path,
                                     const std::string& bundle_b_path, const std::string& model,
                                     const std::string& metric) {
    const nlohmann::json a = load_json_file(bundle_a_path);
    const nlohmann::json b = load_json_file(bundle_b_path);
    const std::string use_metric = metric.empty() ? "accuracy" : metric;

    std::vector<std::string> targets;
    if (!model.empty()) {
        targets.push_back(model);
    } else {
        const auto names_b = bundle_model_names(b);
        for (const auto& name : bundle_model_names(a))
            if (std::find(names_b.begin(), names_b.end(), name) != names_b.end())
                targets.push_back(name);
    }
    if (targets.empty()) throw DataError("no common models between the two bundles");

    ojson out;
    out["metric"] = use_metric;
    out["a"] = bundle_a_path;
    out["b"] = bundle_b_path;
    out["results"] = ojson::array();
    for (const auto& name : targets) {
        const auto fa = bundle_fold_metric(a, name, use_metric);
        const auto fb = bundle_fold_metric(b, name, use_metric);
        ojson row;
        row["model"] = name;
        if (fa.size() != fb.size()) {
            row["error"] = "fold counts differ";
        } else {
            try {
                const TTestResult r = paired_t_test(fa, fb);
                row["t"] = r.t;
                row["dof"] = r.dof;
                row["p"] = r.p;
            } catch (const Error& e) {
                row["error"] = e.what();
            }
        }
        out["results"].push_back(row);
    }
    return out;
}

}  // namespace hycard
