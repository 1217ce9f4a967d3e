#ifndef JSDM_H
#define JSDM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum JsdmStatus {
  JSDM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  JSDM_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or not valid UTF-8.
   */
  JSDM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A file could not be read or written.
   */
  JSDM_STATUS_IO = 3,
  /**
   * A file could not be parsed or failed schema validation.
   */
  JSDM_STATUS_PARSE = 4,
  /**
   * The model rejected its input (geometry, profiles, dimensions).
   */
  JSDM_STATUS_MODEL = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  JSDM_STATUS_PANIC = 6,
} JsdmStatus;

typedef struct JsdmResults JsdmResults;

typedef struct JsdmScenario JsdmScenario;

typedef struct JsdmSelection JsdmSelection;

/**
 * One row of a results table.
 */
typedef struct JsdmPoint {
  double grid_db;
  double sum_rate_bps_hz;
  double sum_rate_stderr;
  double users_served_mean;
} JsdmPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The string
 * stays valid until the next failing call on the same thread.
 */
const char *jsdm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *jsdm_version(void);

/**
 * Load and validate a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum JsdmStatus jsdm_scenario_load(const char *path, struct JsdmScenario **out);

/**
 * # Safety
 * `s` must come from [`jsdm_scenario_load`] and not be used afterwards.
 */
void jsdm_scenario_free(struct JsdmScenario *s);

/**
 * Number of user profiles (conflict-graph nodes).
 *
 * # Safety
 * `s` must be a live scenario handle or null.
 */
size_t jsdm_scenario_profile_count(const struct JsdmScenario *s);

/**
 * Override the master seed.
 *
 * # Safety
 * `s` must be a live scenario handle.
 */
enum JsdmStatus jsdm_scenario_set_seed(struct JsdmScenario *s, uint64_t seed);

/**
 * Override the number of trials (must be at least 1).
 *
 * # Safety
 * `s` must be a live scenario handle.
 */
enum JsdmStatus jsdm_scenario_set_trials(struct JsdmScenario *s, size_t trials);

/**
 * Override the Greedy Algorithm 2 threshold (non-negative).
 *
 * # Safety
 * `s` must be a live scenario handle.
 */
enum JsdmStatus jsdm_scenario_set_epsilon(struct JsdmScenario *s, double epsilon);

/**
 * Run the scenario's user selection.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum JsdmStatus jsdm_select(const struct JsdmScenario *s, struct JsdmSelection **out);

/**
 * # Safety
 * `sel` must come from [`jsdm_select`] and not be used afterwards.
 */
void jsdm_selection_free(struct JsdmSelection *sel);

/**
 * Number of selected profiles.
 *
 * # Safety
 * `sel` must be a live selection handle or null.
 */
size_t jsdm_selection_count(const struct JsdmSelection *sel);

/**
 * 1 if profile `index` is selected, 0 if not, -1 if out of range or null.
 *
 * # Safety
 * `sel` must be a live selection handle or null.
 */
int32_t jsdm_selection_is_selected(const struct JsdmSelection *sel, size_t index);

/**
 * Objective value of the selection (Q1, or the cardinality for Q2 searches).
 *
 * # Safety
 * `sel` must be a live selection handle or null.
 */
double jsdm_selection_objective(const struct JsdmSelection *sel);

/**
 * Simulate the scenario's own mode and algorithm.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum JsdmStatus jsdm_sweep(const struct JsdmScenario *s, struct JsdmResults **out);

/**
 * Simulate every mode with the default algorithm set on shared draws.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum JsdmStatus jsdm_compare(const struct JsdmScenario *s, struct JsdmResults **out);

/**
 * # Safety
 * `r` must come from [`jsdm_sweep`] or [`jsdm_compare`] and not be used afterwards.
 */
void jsdm_results_free(struct JsdmResults *r);

/**
 * Number of `(mode, algorithm)` series.
 *
 * # Safety
 * `r` must be a live results handle or null.
 */
size_t jsdm_results_series_count(const struct JsdmResults *r);

/**
 * Number of grid points in series `series`.
 *
 * # Safety
 * `r` must be a live results handle or null.
 */
size_t jsdm_results_point_count(const struct JsdmResults *r, size_t series);

/**
 * Copy one grid point of one series into `out`.
 *
 * # Safety
 * `r` must be a live results handle; `out` must be writable.
 */
enum JsdmStatus jsdm_results_point(const struct JsdmResults *r,
                                   size_t series,
                                   size_t point,
                                   struct JsdmPoint *out);

/**
 * Write the results table as CSV.
 *
 * # Safety
 * `r` must be a live results handle; `path` a NUL-terminated string.
 */
enum JsdmStatus jsdm_results_export_csv(const struct JsdmResults *r, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JSDM_H */
