/*
 * hycard — hybrid cardiovascular-risk classifier toolkit.
 *
 * C API over the C++ core: opaque handles, integer status codes, and JSON
 * strings for structured payloads. Every function returns HY_OK (0) on
 * success; on failure hy_last_error() holds a thread-local message.
 *
 * Status codes double as suggested process exit codes:
 *   2 = configuration error, 3 = data error, 4 = numeric failure.
 *
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with hy_string_free().
 */

#ifndef HYCARD_H
#define HYCARD_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#if defined(HY_BUILD_SHARED)
#define HY_API __declspec(dllexport)
#else
#define HY_API __declspec(dllimport)
#endif
#else
#define HY_API __attribute__((visibility("default")))
#endif

typedef enum hy_status {
    HY_OK = 0,
    HY_ERROR = 1,        /* invalid argument / internal failure */
    HY_ERROR_CONFIG = 2, /* configuration problem */
    HY_ERROR_DATA = 3,   /* dataset / file problem */
    HY_ERROR_NUMERIC = 4 /* numeric failure (non-finite loss, degenerate test) */
} hy_status;

HY_API const char* hy_version(void);

/* Message of the most recent failure on this thread; empty string if none. */
HY_API const char* hy_last_error(void);

HY_API void hy_string_free(char* s);

/* Worker cap used by parallel sections: HYCARD_THREADS when set, otherwise
 * the hardware thread count. */
HY_API int hy_threads(void);

/* ------------------------------------------------------------------------
 * Tables
 * ---------------------------------------------------------------------- */

typedef struct hy_table hy_table;

/* schema: "dataset1" | "dataset2". The CSV delimiter (comma or semicolon) is
 * auto-detected. */
HY_API hy_status hy_table_load_csv(const char* path, const char* schema, hy_table** out);

/* Deterministic synthetic table with learnable labels. */
HY_API hy_status hy_table_synth(const char* schema, long long rows, double class_balance,
                                uint64_t seed, hy_table** out);

HY_API long long hy_table_rows(const hy_table* table);
HY_API long long hy_table_columns(const hy_table* table);

/* Comma-delimited output with a header row. */
HY_API hy_status hy_table_write_csv(const hy_table* table, const char* path);

HY_API void hy_table_free(hy_table* table);

/* ------------------------------------------------------------------------
 * Pipeline
 * ---------------------------------------------------------------------- */

typedef struct hy_bundle hy_bundle;

/* Cleans the configured dataset (dedup, outlier rules, unit conversions) and
 * returns a JSON report of retained counts. cleaned_csv_path may be NULL. */
HY_API hy_status hy_prepare(const char* config_json, const char* cleaned_csv_path,
                            char** report_json_out);

/* Runs the full experiment described by the JSON config: ingest, cleaning,
 * stratified holdout, leakage-safe cross-validation of every configured
 * model, weighted-vote ensemble, holdout scoring, and paired t-tests. */
HY_API hy_status hy_run(const char* config_json, hy_bundle** out);

HY_API hy_status hy_bundle_json(const hy_bundle* bundle, char** json_out);

/* Writes bundle.json, comparison/ablation/cost tables, timings.json, and
 * votes.jsonl (when the config enabled vote traces) into out_dir.
 * format: "markdown" | "csv" | "both". */
HY_API hy_status hy_bundle_write(const hy_bundle* bundle, const char* out_dir, const char* format);

HY_API void hy_bundle_free(hy_bundle* bundle);

/* Parameter counts and per-fold training seconds for the configured models;
 * returns a JSON report. */
HY_API hy_status hy_cost(const char* config_json, char** report_json_out);

/* Paired t-test between per-fold CV metrics of two saved bundle.json files.
 * model: display name ("Hybrid", "KNN", ...) or NULL/"" for all common
 * models. metric: "accuracy" (default when NULL/""), "precision", "recall",
 * "f1", or "specificity". */
HY_API hy_status hy_ttest(const char* bundle_a_path, const char* bundle_b_path, const char* model,
                          const char* metric, char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HYCARD_H */
