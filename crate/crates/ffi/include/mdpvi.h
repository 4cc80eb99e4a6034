#ifndef MDPVI_H
#define MDPVI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum MdpviStatus {
  MDPVI_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MDPVI_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not UTF-8.
   */
  MDPVI_STATUS_INVALID_UTF8 = 2,
  /**
   * JSON could not be parsed.
   */
  MDPVI_STATUS_PARSE_ERROR = 3,
  /**
   * The MDP or a parameter failed validation.
   */
  MDPVI_STATUS_INVALID_INPUT = 4,
  /**
   * A caller buffer has the wrong length.
   */
  MDPVI_STATUS_BUFFER_LENGTH = 5,
  /**
   * Value iteration hit its iteration cap.
   */
  MDPVI_STATUS_ITERATION_CAP = 6,
  /**
   * A policy-evaluation system was singular.
   */
  MDPVI_STATUS_SINGULAR = 7,
  /**
   * A panic was caught inside the library.
   */
  MDPVI_STATUS_INTERNAL = 8,
} MdpviStatus;

/**
 * Validated MDP.
 */
typedef struct MdpviMdp MdpviMdp;

/**
 * Outcome of one value-iteration run.
 */
typedef struct MdpviRun MdpviRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *mdpvi_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mdpvi_version(void);

/**
 * Parses and validates an MDP from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MdpviStatus mdpvi_mdp_from_json(const char *json, struct MdpviMdp **out);

/**
 * # Safety
 * `mdp` must come from [`mdpvi_mdp_from_json`] and not be freed twice.
 */
void mdpvi_mdp_free(struct MdpviMdp *mdp);

/**
 * Number of states, or 0 for a null handle.
 *
 * # Safety
 * `mdp` must be null or a live handle.
 */
size_t mdpvi_mdp_num_states(const struct MdpviMdp *mdp);

/**
 * Runs span-stopped value iteration. `v0` may be null for zeros.
 *
 * # Safety
 * `mdp` must be a live handle, `v0` null or `v0_len` readable doubles,
 * `out` writable.
 */
enum MdpviStatus mdpvi_value_iterate(const struct MdpviMdp *mdp,
                                     double alpha,
                                     double epsilon,
                                     const double *v0,
                                     size_t v0_len,
                                     struct MdpviRun **out);

/**
 * # Safety
 * `run` must come from [`mdpvi_value_iterate`] and not be freed twice.
 */
void mdpvi_run_free(struct MdpviRun *run);

/**
 * Backups performed, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
uint64_t mdpvi_run_iterations(const struct MdpviRun *run);

/**
 * Length of the span trace (equals the iteration count).
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t mdpvi_run_span_trace_len(const struct MdpviRun *run);

/**
 * Copies the 0-based greedy action of each state into `out[0..len]`.
 *
 * # Safety
 * `run` must be a live handle and `out` hold `len` writable entries.
 */
enum MdpviStatus mdpvi_run_policy(const struct MdpviRun *run, size_t *out, size_t len);

/**
 * Copies the last iterate.
 *
 * # Safety
 * `run` must be a live handle and `out` hold `len` writable entries.
 */
enum MdpviStatus mdpvi_run_final_value(const struct MdpviRun *run, double *out, size_t len);

/**
 * Copies the span of each successive difference.
 *
 * # Safety
 * `run` must be a live handle and `out` hold `len` writable entries.
 */
enum MdpviStatus mdpvi_run_span_trace(const struct MdpviRun *run, double *out, size_t len);

/**
 * Exact optimum by policy iteration. Both buffers have one entry per state;
 * either may be null if not wanted.
 *
 * # Safety
 * `mdp` must be a live handle; non-null buffers hold `len` entries.
 */
enum MdpviStatus mdpvi_policy_iterate(const struct MdpviMdp *mdp,
                                      double alpha,
                                      size_t *policy_out,
                                      double *value_out,
                                      size_t len);

/**
 * Exact `gamma` and the cheap upper estimate `gamma'`. Either output may be
 * null.
 *
 * # Safety
 * `mdp` must be a live handle; non-null outputs must be writable.
 */
enum MdpviStatus mdpvi_gamma(const struct MdpviMdp *mdp, double *gamma, double *gamma_prime);

/**
 * Full bound report as a JSON string; release it with
 * [`mdpvi_string_free`]. `v0` may be null for zeros.
 *
 * # Safety
 * As for [`mdpvi_value_iterate`].
 */
enum MdpviStatus mdpvi_bounds_json(const struct MdpviMdp *mdp,
                                   double alpha,
                                   double epsilon,
                                   const double *v0,
                                   size_t v0_len,
                                   char **out);

/**
 * # Safety
 * `s` must be null or come from this library and not be freed twice.
 */
void mdpvi_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDPVI_H */
