#ifndef TIMING_INFERENCE_H
#define TIMING_INFERENCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum TiStatus {
  TI_STATUS_OK = 0,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  TI_STATUS_NULL_OR_ENCODING = 1,
  /**
   * Malformed or invalid input (bad JSON, wrong dimensions, infeasible constraints).
   */
  TI_STATUS_INVALID_INPUT = 2,
  /**
   * The computation itself failed (undefined correlation, non-finite values).
   */
  TI_STATUS_DOMAIN = 3,
  /**
   * Output buffer too small.
   */
  TI_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * Internal panic; the library state is still usable.
   */
  TI_STATUS_PANIC = 5,
} TiStatus;

/**
 * Opaque model configuration (model, hidden-state support, likelihood mode).
 */
typedef struct TiModel TiModel;

/**
 * Opaque timed trajectory.
 */
typedef struct TiTrajectory TiTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on this thread.
 */
const char *ti_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ti_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ti_string_free(char *s);

/**
 * Parses `{"waypoints": [[..]..], "stamps": [..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TiStatus ti_trajectory_from_json(const char *json, struct TiTrajectory **out);

/**
 * Serializes a trajectory to JSON.
 *
 * # Safety
 * `traj` must be a live handle; `out` must be writable.
 */
enum TiStatus ti_trajectory_to_json(const struct TiTrajectory *traj, char **out);

/**
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void ti_trajectory_free(struct TiTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be writable.
 */
enum TiStatus ti_trajectory_total_duration(const struct TiTrajectory *traj, double *out);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be writable.
 */
enum TiStatus ti_trajectory_len(const struct TiTrajectory *traj, size_t *out);

/**
 * Generates one condition, e.g. `"fast_StoF_pause"`. `params_json` may be
 * null for defaults; otherwise it is a generator parameter object whose
 * missing fields take default values.
 *
 * # Safety
 * String arguments must be NUL-terminated (or null where allowed); `out`
 * must be writable.
 */
enum TiStatus ti_generate_condition(const char *condition_id,
                                    const char *params_json,
                                    struct TiTrajectory **out);

/**
 * Parses a model configuration such as `{"model": "confidence"}`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum TiStatus ti_model_from_json(const char *json, struct TiModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ti_model_free(struct TiModel *model);

/**
 * Number of hidden-state values the model ranges over.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum TiStatus ti_model_support_len(const struct TiModel *model, size_t *out);

/**
 * Label of support entry `index`, as a caller-owned string.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum TiStatus ti_model_support_label(const struct TiModel *model, size_t index, char **out);

/**
 * Posterior over the model's support for `traj`, written in support order
 * to `probs[0..probs_len]`. The normalizing family is `family[0..family_len]`;
 * pass a null `family` to use `traj` alone.
 *
 * # Safety
 * All handles must be live; `family` must point to `family_len` handles;
 * `probs` must have room for `probs_len` doubles.
 */
enum TiStatus ti_model_posterior(const struct TiModel *model,
                                 const struct TiTrajectory *traj,
                                 const struct TiTrajectory *const *family,
                                 size_t family_len,
                                 double *probs,
                                 size_t probs_len);

/**
 * Timing search. Request:
 * `{"path": {"waypoints": ..}, "model": {..}, "target": "high",
 *   "constraints": {..}, "search": "exhaustive" | "coordinate_descent"}`.
 * The report is returned as JSON.
 *
 * # Safety
 * `request_json` must be NUL-terminated; `out` must be writable.
 */
enum TiStatus ti_optimize_json(const char *request_json, char **out);

/**
 * Grid fit. Request:
 * `{"model": {..}, "ratings": {"<id>": 4.2, ..},
 *   "conditions": {"<id>": <trajectory>, ..}, "grid": {..}?}`.
 * The conditions form the normalizing family. The result is returned as JSON.
 *
 * # Safety
 * `request_json` must be NUL-terminated; `out` must be writable.
 */
enum TiStatus ti_fit_json(const char *request_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TIMING_INFERENCE_H */
