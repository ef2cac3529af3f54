#include "hycard/hycard.h"

#include <cstring>
#include <new>
#include <string>

#include "cv.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "table.hpp"

using namespace hycard;

struct hy_table {
    RawTable table;
};

struct hy_bundle {
    ReportBundle bundle;
};

namespace {

thread_local std::string g_last_error;

hy_status status_from(const Error& e) {
    g_last_error = e.what();
    switch (e.code()) {
        case ErrorCode::Config: return HY_ERROR_CONFIG;
        case ErrorCode::Data: return HY_ERROR_DATA;
        case ErrorCode::Numeric: return HY_ERROR_NUMERIC;
        case ErrorCode::Internal: return HY_ERROR;
    }
    return HY_ERROR;
}

template <typename Fn>
hy_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return HY_OK;
    } catch (const Error& e) {
        return status_from(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return HY_ERROR;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HY_ERROR;
    }
}

hy_status invalid_argument(const char* what) {
    g_last_error = what;
    return HY_ERROR;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* hy_version(void) { return "0.1.0"; }

const char* hy_last_error(void) { return g_last_error.c_str(); }

void hy_string_free(char* s) { delete[] s; }

int hy_threads(void) { return static_cast<int>(resolve_threads()); }

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

hy_status hy_table_load_csv(const char* path, const char* schema, hy_table** out) {
    if (!path || !schema || !out) return invalid_argument("hy_table_load_csv: null argument");
    return guarded([&] {
        auto handle = std::make_unique<hy_table>();
        handle->table = load_csv(path, descriptor_by_name(schema));
        *out = handle.release();
    });
}

hy_status hy_table_synth(const char* schema, long long rows, double class_balance, uint64_t seed,
                         hy_table** out) {
    if (!schema || !out) return invalid_argument("hy_table_synth: null argument");
    if (rows < 0) return invalid_argument("hy_table_synth: rows must be >= 0");
    return guarded([&] {
        auto handle = std::make_unique<hy_table>();
        handle->table = synth_generate(descriptor_by_name(schema), static_cast<size_t>(rows),
                                       class_balance, seed);
        *out = handle.release();
    });
}

long long hy_table_rows(const hy_table* table) {
    return table ? static_cast<long long>(table->table.row_count()) : -1;
}

long long hy_table_columns(const hy_table* table) {
    return table ? static_cast<long long>(table->table.column_count()) : -1;
}

hy_status hy_table_write_csv(const hy_table* table, const char* path) {
    if (!table || !path) return invalid_argument("hy_table_write_csv: null argument");
    return guarded([&] { write_csv(table->table, path); });
}

void hy_table_free(hy_table* table) { delete table; }

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

hy_status hy_prepare(const char* config_json, const char* cleaned_csv_path,
                     char** report_json_out) {
    if (!config_json || !report_json_out) return invalid_argument("hy_prepare: null argument");
    return guarded([&] {
        const ExperimentConfig cfg = ExperimentConfig::from_json_text(config_json);
        const auto report = prepare_report(cfg, cleaned_csv_path ? cleaned_csv_path : "");
        *report_json_out = dup_string(report.dump(2));
    });
}

hy_status hy_run(const char* config_json, hy_bundle** out) {
    if (!config_json || !out) return invalid_argument("hy_run: null argument");
    return guarded([&] {
        const ExperimentConfig cfg = ExperimentConfig::from_json_text(config_json);
        auto handle = std::make_unique<hy_bundle>();
        handle->bundle = run_experiment(cfg);
        if (!cfg.output_dir.empty()) write_bundle(handle->bundle, cfg.output_dir, cfg.format);
        *out = handle.release();
    });
}

hy_status hy_bundle_json(const hy_bundle* bundle, char** json_out) {
    if (!bundle || !json_out) return invalid_argument("hy_bundle_json: null argument");
    return guarded([&] { *json_out = dup_string(bundle->bundle.to_json().dump(2)); });
}

hy_status hy_bundle_write(const hy_bundle* bundle, const char* out_dir, const char* format) {
    if (!bundle || !out_dir) return invalid_argument("hy_bundle_write: null argument");
    return guarded([&] {
        write_bundle(bundle->bundle, out_dir, format && *format ? format : "both");
    });
}

void hy_bundle_free(hy_bundle* bundle) { delete bundle; }

hy_status hy_cost(const char* config_json, char** report_json_out) {
    if (!config_json || !report_json_out) return invalid_argument("hy_cost: null argument");
    return guarded([&] {
        const ExperimentConfig cfg = ExperimentConfig::from_json_text(config_json);
        *report_json_out = dup_string(cost_profile(cfg).dump(2));
    });
}

hy_status hy_ttest(const char* bundle_a_path, const char* bundle_b_path, const char* model,
                   const char* metric, char** report_json_out) {
    if (!bundle_a_path || !bundle_b_path || !report_json_out)
        return invalid_argument("hy_ttest: null argument");
    return guarded([&] {
        const auto report = ttest_bundles(bundle_a_path, bundle_b_path, model ? model : "",
                                          metric ? metric : "");
        *report_json_out = dup_string(report.dump(2));
    });
}

}  // extern "C"
