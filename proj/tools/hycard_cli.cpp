// Command-line front end for the hycard shared library. All pipeline work
// happens behind the C API in hycard/hycard.h; this tool only assembles the
// JSON config (file + flag overrides) and renders results.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hycard/hycard.h"

namespace {

using nlohmann::json;

int fail_with(hy_status status) {
    std::cerr << "error: " << hy_last_error() << "\n";
    return static_cast<int>(status);
}

std::string take_string(char* owned) {
    std::string out = owned ? owned : "";
    hy_string_free(owned);
    return out;
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError(std::string(what) + ": cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CLI::ValidationError(std::string(what) + ": " + e.what());
    }
    return j;
}

struct CommonFlags {
    std::string config_path;
    std::string dataset;
    std::string data_path;
    std::string schema;
    std::optional<uint64_t> seed;
    std::optional<long long> subsample;
    std::string out_dir;
    bool emit_votes = false;
    std::string format;
    std::string rules_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_outputs) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config file");
    cmd->add_option("--dataset", flags.dataset,
                    "dataset1 | dataset2 | synthetic, or a path to a CSV file");
    cmd->add_option("--data", flags.data_path, "path to the dataset CSV");
    cmd->add_option("--schema", flags.schema, "column schema for CSV paths (dataset1 | dataset2)");
    cmd->add_option("--seed", flags.seed, "master seed (cv, holdout, synthesis)");
    cmd->add_option("--subsample", flags.subsample, "stratified row subsample count");
    cmd->add_option("--rules", flags.rules_path, "JSON file with outlier rules");
    if (with_outputs) {
        cmd->add_option("--out", flags.out_dir, "output directory for bundle.json and tables");
        cmd->add_flag("--emit-votes", flags.emit_votes, "write per-row vote traces (votes.jsonl)");
        cmd->add_option("--format", flags.format, "table format: markdown | csv | both")
            ->check(CLI::IsMember({"markdown", "csv", "both"}));
    }
}

json build_config(const CommonFlags& flags) {
    json cfg = json::object();
    if (!flags.config_path.empty()) cfg = read_json_file(flags.config_path, "--config");
    if (!flags.dataset.empty()) {
        if (flags.dataset == "dataset1" || flags.dataset == "dataset2" ||
            flags.dataset == "synthetic") {
            cfg["dataset"] = flags.dataset;
        } else {
            cfg["dataset"] = "custom";
            cfg["data_path"] = flags.dataset;
        }
    }
    if (!flags.data_path.empty()) cfg["data_path"] = flags.data_path;
    if (!flags.schema.empty()) cfg["schema"] = flags.schema;
    if (flags.seed) cfg["seed"] = *flags.seed;
    if (flags.subsample) cfg["subsample"] = *flags.subsample;
    if (!flags.out_dir.empty()) cfg["output_dir"] = flags.out_dir;
    if (flags.emit_votes) cfg["emit_votes"] = true;
    if (!flags.format.empty()) cfg["format"] = flags.format;
    if (!flags.rules_path.empty())
        cfg["outlier_rules"] = read_json_file(flags.rules_path, "--rules");
    return cfg;
}

void print_run_summary(const json& bundle) {
    const auto& ds = bundle.at("dataset");
    std::cout << "dataset " << ds.at("name").get<std::string>() << ": "
              << ds.at("rows_loaded").get<long long>() << " rows loaded, "
              << ds.at("rows_retained").get<long long>() << " retained, "
              << ds.at("train_rows").get<long long>() << " train / "
              << ds.at("holdout_rows").get<long long>() << " holdout\n";
    auto line = [](const std::string& name, const json& cv, const json& holdout) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-9s cv acc %.2f%% (std %.2f)  holdout acc %.2f%%",
                      name.c_str(), cv.at("mean").at("accuracy").get<double>() * 100.0,
                      cv.at("std").at("accuracy").get<double>() * 100.0,
                      holdout.at("accuracy").get<double>() * 100.0);
        std::cout << buf << "\n";
    };
    for (const auto& m : bundle.at("models"))
        line(m.at("display").get<std::string>(), m.at("cv"), m.at("holdout"));
    if (bundle.contains("ensemble") && !bundle.at("ensemble").at("members").empty())
        line("Hybrid", bundle.at("ensemble").at("cv"), bundle.at("ensemble").at("holdout"));
    std::cout << "strongest single model: " << bundle.at("strongest_baseline").get<std::string>()
              << "\n";
    for (const auto& t : bundle.at("ttests")) {
        if (!t.contains("p")) continue;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "t-test %s vs %s: t=%.3f dof=%lld p=%.4f",
                      t.at("model").get<std::string>().c_str(),
                      t.at("vs").get<std::string>().c_str(), t.at("t").get<double>(),
                      t.at("dof").get<long long>(), t.at("p").get<double>());
        std::cout << buf << "\n";
    }
}

int do_run(const CommonFlags& flags, bool ablation_preset) {
    json cfg = build_config(flags);
    if (ablation_preset && !cfg.contains("models")) {
        cfg["models"] = json::array();
        for (const char* kind : {"knn", "xgb", "cnn", "lstm", "cnn_lstm"})
            cfg["models"].push_back(kind);
    }
    hy_bundle* bundle = nullptr;
    hy_status status = hy_run(cfg.dump().c_str(), &bundle);
    if (status != HY_OK) return fail_with(status);

    char* text = nullptr;
    status = hy_bundle_json(bundle, &text);
    if (status != HY_OK) {
        hy_bundle_free(bundle);
        return fail_with(status);
    }
    print_run_summary(json::parse(take_string(text)));
    if (!flags.out_dir.empty() || (cfg.contains("output_dir") && !cfg["output_dir"].empty())) {
        std::cout << "outputs written to "
                  << (flags.out_dir.empty() ? cfg["output_dir"].get<std::string>() : flags.out_dir)
                  << "\n";
    }
    hy_bundle_free(bundle);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid CNN-LSTM + KNN + XGB cardiovascular-risk experiment runner"};
    app.require_subcommand(1);

    CommonFlags prepare_flags, run_flags, ablate_flags, cost_flags;
    std::string prepare_out;

    auto* prepare = app.add_subcommand("prepare", "clean a dataset and report retained counts");
    add_common_flags(prepare, prepare_flags, false);
    prepare->add_option("--out", prepare_out, "write the cleaned table to this CSV file");

    auto* run = app.add_subcommand("run", "run the full experiment and emit tables");
    add_common_flags(run, run_flags, true);

    auto* ablate = app.add_subcommand(
        "ablate", "run the constituent-model ablation (CNN / LSTM / CNN-LSTM / hybrid)");
    add_common_flags(ablate, ablate_flags, true);

    auto* cost = app.add_subcommand("cost", "profile parameter counts and per-fold training time");
    add_common_flags(cost, cost_flags, false);

    auto* ttest = app.add_subcommand("ttest", "paired t-test between two saved bundles");
    std::string ttest_a, ttest_b, ttest_model, ttest_metric = "accuracy";
    ttest->add_option("--a", ttest_a, "first bundle.json")->required();
    ttest->add_option("--b", ttest_b, "second bundle.json")->required();
    ttest->add_option("--model", ttest_model, "display name of one model (default: all common)");
    ttest->add_option("--metric", ttest_metric, "metric to compare")
        ->check(CLI::IsMember({"accuracy", "precision", "recall", "f1", "specificity"}));

    auto* synth = app.add_subcommand("synth", "generate a synthetic CSV fixture");
    std::string synth_schema = "dataset2", synth_out;
    long long synth_n = 1000;
    double synth_balance = 0.5;
    uint64_t synth_seed = 1;
    synth->add_option("--schema", synth_schema, "dataset1 | dataset2")
        ->check(CLI::IsMember({"dataset1", "dataset2"}));
    synth->add_option("--n", synth_n, "row count");
    synth->add_option("--balance", synth_balance, "positive-class fraction");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (prepare->parsed()) {
            json cfg = build_config(prepare_flags);
            char* report = nullptr;
            hy_status status = hy_prepare(cfg.dump().c_str(),
                                          prepare_out.empty() ? nullptr : prepare_out.c_str(),
                                          &report);
            if (status != HY_OK) return fail_with(status);
            std::cout << take_string(report) << "\n";
            return 0;
        }
        if (run->parsed()) return do_run(run_flags, false);
        if (ablate->parsed()) return do_run(ablate_flags, true);
        if (cost->parsed()) {
            json cfg = build_config(cost_flags);
            char* report = nullptr;
            hy_status status = hy_cost(cfg.dump().c_str(), &report);
            if (status != HY_OK) return fail_with(status);
            std::cout << take_string(report) << "\n";
            return 0;
        }
        if (ttest->parsed()) {
            char* report = nullptr;
            hy_status status = hy_ttest(ttest_a.c_str(), ttest_b.c_str(), ttest_model.c_str(),
                                        ttest_metric.c_str(), &report);
            if (status != HY_OK) return fail_with(status);
            std::cout << take_string(report) << "\n";
            return 0;
        }
        if (synth->parsed()) {
            hy_table* table = nullptr;
            hy_status status =
                hy_table_synth(synth_schema.c_str(), synth_n, synth_balance, synth_seed, &table);
            if (status != HY_OK) return fail_with(status);
            status = hy_table_write_csv(table, synth_out.c_str());
            hy_table_free(table);
            if (status != HY_OK) return fail_with(status);
            std::cout << "wrote " << synth_n << " rows to " << synth_out << "\n";
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
