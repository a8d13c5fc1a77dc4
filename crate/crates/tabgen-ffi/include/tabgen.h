/* C interface for the tabgen synthetic tabular data engine. */

#ifndef TABGEN_H
#define TABGEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every API call.
 */
typedef enum TabgenStatus {
  TABGEN_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TABGEN_STATUS_NULL_ARGUMENT = 1,
  /**
   * Arguments were present but invalid (bad JSON, bad column, ...).
   */
  TABGEN_STATUS_INVALID_ARGUMENT = 2,
  /**
   * File system failure.
   */
  TABGEN_STATUS_IO = 3,
  /**
   * Input could not be parsed (CSV, manifest, reply).
   */
  TABGEN_STATUS_PARSE = 4,
  /**
   * Generation backend failure (credentials, retries exhausted).
   */
  TABGEN_STATUS_BACKEND = 5,
  /**
   * Unexpected internal failure.
   */
  TABGEN_STATUS_INTERNAL = 6,
} TabgenStatus;

/**
 * Opaque table handle. Create with `tabgen_table_load_csv` or
 * `tabgen_generate`, release with `tabgen_table_free`.
 */
typedef struct TabgenTable TabgenTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Human-readable description of the last failure on this thread. The
 * pointer stays valid until the next failing call on the same thread;
 * do not free it.
 */
const char *tabgen_last_error_message(void);

/**
 * Library version as a static string; do not free.
 */
const char *tabgen_version(void);

/**
 * Release a string returned through an out-pointer.
 *
 * # Safety
 * `s` must have been returned by this library and not freed before.
 */
void tabgen_string_free(char *s);

/**
 * Release a table handle.
 *
 * # Safety
 * `table` must have been returned by this library and not freed before.
 */
void tabgen_table_free(struct TabgenTable *table);

/**
 * Load a CSV file with a header row into a new table handle.
 * `manifest_json` optionally carries a dataset manifest document
 * (see docs/schemas/dataset_manifest.schema.json); pass null to infer
 * column kinds from the data.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string, `manifest_json` null or
 * likewise, and `out_table` a valid out-pointer.
 */
enum TabgenStatus tabgen_table_load_csv(const char *path,
                                        const char *manifest_json,
                                        struct TabgenTable **out_table);

/**
 * Number of rows in the table, or 0 for a null handle.
 *
 * # Safety
 * `table` must be a live handle from this library or null.
 */
size_t tabgen_table_row_count(const struct TabgenTable *table);

/**
 * Number of columns in the table, or 0 for a null handle.
 *
 * # Safety
 * `table` must be a live handle from this library or null.
 */
size_t tabgen_table_column_count(const struct TabgenTable *table);

/**
 * Write the table as CSV with its schema's header.
 *
 * # Safety
 * `table` must be a live handle, `path` a valid NUL-terminated string.
 */
enum TabgenStatus tabgen_table_write_csv(const struct TabgenTable *table, const char *path);

/**
 * Produce the dataset manifest describing the table's schema, as a JSON
 * string owned by the caller.
 *
 * # Safety
 * `table` must be a live handle, `out_json` a valid out-pointer.
 */
enum TabgenStatus tabgen_table_manifest_json(const struct TabgenTable *table, char **out_json);

/**
 * Table-level distribution distance between two tables with identical
 * schemas. `kind` is 0 for KSD, 1 for JSD; `bins` is the histogram bin
 * count for JSD scoring.
 *
 * # Safety
 * `a` and `b` must be live handles, `out_distance` a valid out-pointer.
 */
enum TabgenStatus tabgen_table_distance(const struct TabgenTable *a,
                                        const struct TabgenTable *b,
                                        int kind,
                                        size_t bins,
                                        double *out_distance);

/**
 * Run the iterative generation loop against `real` with a run
 * configuration document (the `run` object of the run manifest schema)
 * and hand back the synthetic table. Remote backends read the API key
 * from the TABGEN_API_KEY environment variable.
 *
 * # Safety
 * `real` must be a live handle, `run_config_json` a valid NUL-terminated
 * string, `out_table` a valid out-pointer.
 */
enum TabgenStatus tabgen_generate(const struct TabgenTable *real,
                                  const char *run_config_json,
                                  struct TabgenTable **out_table);

/**
 * Evaluate a synthetic table against a real one and return the full
 * report as a JSON document (fidelity, utility when a target is given,
 * privacy; see docs/schemas/evaluation_report.schema.json). Both handles
 * must come from CSVs sharing a schema. `options_json` may be null or an
 * object with optional `seed`, `bins`, `neighbors`, `holdout_fraction`,
 * and `target` fields.
 *
 * # Safety
 * `real_csv_path` and `synthetic_csv_path` must be valid NUL-terminated
 * strings, `options_json` null or likewise, `out_json` a valid
 * out-pointer.
 */
enum TabgenStatus tabgen_evaluate_json(const char *real_csv_path,
                                       const char *synthetic_csv_path,
                                       const char *options_json,
                                       char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TABGEN_H */
