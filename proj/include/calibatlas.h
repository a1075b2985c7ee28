/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface of the calib-atlas forecast-calibration audit library.
 *
 * Conventions:
 *   - Every fallible call returns a ca_status; CA_OK is 0. On failure the
 *     thread-local message from ca_last_error() describes what went wrong.
 *   - Out-parameters are written only on CA_OK.
 *   - Strings returned through char** are heap-allocated; release them with
 *     ca_string_free(). Handles are released with their *_free() function.
 *   - All functions are thread-safe as long as a handle is not used
 *     concurrently from two threads.
 */
#ifndef CALIBATLAS_H_
#define CALIBATLAS_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Mirrors the library's internal error codes one-to-one. */
typedef enum ca_status {
  CA_OK = 0,
  CA_NEGATIVE_WEIGHT = 1,
  CA_NOT_NORMALIZED = 2,
  CA_LENGTH_MISMATCH = 3,
  CA_SPACE_MISMATCH = 4,
  CA_EMPTY_EVENT = 5,
  CA_MISSING_EMBEDDING = 6,
  CA_BAD_PARAM = 7,
  CA_KIND_MISMATCH = 8,
  CA_REJECTION_BUDGET_EXCEEDED = 9,
  CA_NOT_ORIENTED = 10,
  CA_EMPTY_GRID = 11,
  CA_NOT_BINARY = 12,
  CA_EMPTY_DATASET = 13,
  CA_MISSING_PREDICTION = 14,
  CA_EMPTY_MAP = 15,
  CA_EMPTY_GROUP = 16,
  CA_MISSING_INGREDIENT = 17,
  CA_UNREALIZABLE = 18,
  CA_SEPARATION_FAILURE = 19,
  CA_TOO_LARGE = 20,
  CA_SCHEMA_ERROR = 21,
  CA_ROW_ERROR = 22,
  CA_CONFIG_ERROR = 23,
  CA_IO_ERROR = 24,
  CA_INTERNAL = 25,
  CA_UNKNOWN = 26
} ca_status;

/* An audit report or verification manifest (JSON plus a pass flag). */
typedef struct ca_report ca_report;
/* An ingested prediction dataset. */
typedef struct ca_dataset ca_dataset;

/* "calib-atlas x.y.z" */
const char* ca_version(void);

/* Message of the most recent failure on this thread; empty string if none. */
const char* ca_last_error(void);

/*
 * Runs a full audit: parse + validate the config file, ingest the data it
 * references, evaluate every configured metric, and render the report JSON.
 * Config and ingest errors fail the call; metric-level errors produce a
 * partial report carrying a "failed" marker instead.
 */
ca_status ca_audit_run(const char* config_path, ca_report** out_report);

/*
 * Runs a verification suite ("edges", "counterexamples", "oracles", "all")
 * and renders the manifest JSON. The manifest is byte-deterministic for a
 * fixed (suite, seed, bound_scale). bound_scale scales every approximate
 * implication bound and exists for fault-injection tests; pass 1.0 normally.
 */
ca_status ca_verify_run(const char* suite, uint64_t seed, double bound_scale,
                        ca_report** out_report);

/* Document JSON of a report/manifest. */
ca_status ca_report_json(const ca_report* report, char** out_json);
/* 1 when every verdict/check passed, else 0. */
int ca_report_all_pass(const ca_report* report);
/* Writes the document to a file, creating parent directories. */
ca_status ca_report_write(const ca_report* report, const char* path);

/*
 * Reads a report JSON file and writes per-metric reliability CSVs (and
 * simplex.csv for 3-outcome distributional audits) into out_dir. On success
 * *out_listing (optional, may be NULL) receives the written paths joined by
 * newlines.
 */
ca_status ca_plot_emit(const char* report_path, const char* out_dir, char** out_listing);

/* JSON schema text; `which` is "config" or "report". */
ca_status ca_schema_json(const char* which, char** out_json);

/* Ingests the data referenced by a config file without running metrics. */
ca_status ca_dataset_load(const char* config_path, ca_dataset** out_dataset);
ca_status ca_dataset_size(const ca_dataset* dataset, size_t* out_size);
ca_status ca_dataset_total_weight(const ca_dataset* dataset, double* out_weight);
/* One JSONL line per record; reals carry 17 significant digits. */
ca_status ca_dataset_jsonl(const ca_dataset* dataset, char** out_text);

void ca_string_free(char* s);
void ca_report_free(ca_report* report);
void ca_dataset_free(ca_dataset* dataset);

#ifdef __cplusplus
}
#endif

#endif /* CALIBATLAS_H_ */
