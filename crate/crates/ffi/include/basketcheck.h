#ifndef BASKETCHECK_H
#define BASKETCHECK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Build flag: give deadlocked states a self-loop.
 */
#define BC_FIX_DEADLOCKS 1

/**
 * Build flag: uniform choice among overlapping commands (non-standard).
 */
#define BC_MERGE_UNIFORM 2

typedef enum BcEngine {
  BC_ENGINE_EXACT = 0,
  BC_ENGINE_POWER = 1,
  BC_ENGINE_JACOBI = 2,
  BC_ENGINE_GAUSS_SEIDEL = 3,
} BcEngine;

typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_ARGUMENT = 1,
  BC_STATUS_INVALID_UTF8 = 2,
  BC_STATUS_PARSE_ERROR = 3,
  BC_STATUS_BUILD_ERROR = 4,
  BC_STATUS_BIND_ERROR = 5,
  BC_STATUS_NOT_CONVERGED = 6,
  BC_STATUS_INVALID_ARGUMENT = 7,
  BC_STATUS_BUFFER_TOO_SMALL = 8,
  BC_STATUS_IO_ERROR = 9,
} BcStatus;

/**
 * Opaque built chain.
 */
typedef struct BcModel BcModel;

/**
 * Opaque verification result.
 */
typedef struct BcResult BcResult;

typedef struct BcEstimate {
  uint64_t hits;
  uint64_t samples;
  uint64_t censored;
  double estimate;
  double low;
  double high;
} BcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, statically allocated.
 */
const char *bc_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *bc_last_error_message(void);

/**
 * Parses and builds a model from source text.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BcStatus bc_model_parse(const char *source, uint32_t flags, struct BcModel **out);

/**
 * Reads, parses and builds a model file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BcStatus bc_model_load(const char *path, uint32_t flags, struct BcModel **out);

/**
 * # Safety
 * `model` must be null or a handle from `bc_model_parse`/`bc_model_load`
 * that has not been freed.
 */
void bc_model_free(struct BcModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t bc_model_num_states(const struct BcModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t bc_model_num_transitions(const struct BcModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t bc_model_initial_state(const struct BcModel *model);

/**
 * Graphviz rendering of the chain; release with `bc_string_free`.
 *
 * # Safety
 * `model` must be a live handle.
 */
char *bc_model_to_dot(const struct BcModel *model);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void bc_string_free(char *s);

/**
 * Parses, binds and checks one property. `epsilon <= 0` selects the default.
 *
 * # Safety
 * `model` must be a live handle, `property` a valid C string, `out` a valid
 * pointer.
 */
enum BcStatus bc_check(const struct BcModel *model,
                       const char *property,
                       enum BcEngine engine,
                       double epsilon,
                       struct BcResult **out);

/**
 * # Safety
 * `result` must be null or a live handle from `bc_check`.
 */
void bc_result_free(struct BcResult *result);

/**
 * 1 if the bound holds, 0 if not, -1 for queries or a null handle.
 *
 * # Safety
 * `result` must be a live handle.
 */
int32_t bc_result_verdict(const struct BcResult *result);

/**
 * Number of satisfying states.
 *
 * # Safety
 * `result` must be a live handle.
 */
uintptr_t bc_result_count(const struct BcResult *result);

/**
 * Scalar query value at the evaluation state.
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum BcStatus bc_result_value(const struct BcResult *result, double *out);

/**
 * Probability of the path formula at `state`.
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum BcStatus bc_result_state_value(const struct BcResult *result, uintptr_t state, double *out);

/**
 * Two-line text report; release with `bc_string_free`.
 *
 * # Safety
 * `result` must be a live handle.
 */
char *bc_result_report(const struct BcResult *result);

/**
 * Writes the probability of eventually reaching `goal` from every state
 * into `out[0..num_states]`.
 *
 * # Safety
 * `model` must be a live handle, `goal` a valid C string and `out` valid
 * for `len` writes.
 */
enum BcStatus bc_reach_probabilities(const struct BcModel *model,
                                     const char *goal,
                                     enum BcEngine engine,
                                     double epsilon,
                                     double *out,
                                     uintptr_t len);

/**
 * Writes the distribution after `steps` steps from the initial state into
 * `out[0..num_states]`.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for `len` writes.
 */
enum BcStatus bc_transient_distribution(const struct BcModel *model,
                                        uint64_t steps,
                                        double *out,
                                        uintptr_t len);

/**
 * Monte Carlo estimate of reaching `goal` from `start`.
 *
 * # Safety
 * `model` must be a live handle, `goal` a valid C string, `out` a valid
 * pointer.
 */
enum BcStatus bc_estimate_reach(const struct BcModel *model,
                                const char *goal,
                                uintptr_t start,
                                uint64_t samples,
                                uint64_t max_steps,
                                uint64_t seed,
                                struct BcEstimate *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BASKETCHECK_H */
