/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef MTAIL_H
#define MTAIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MtailStatus {
  MTAIL_STATUS_OK = 0,
  MTAIL_STATUS_DOMAIN = 1,
  MTAIL_STATUS_INVALID_PARAMS = 2,
  MTAIL_STATUS_INVALID_MODEL = 3,
  MTAIL_STATUS_UNSUPPORTED_MODEL = 4,
  MTAIL_STATUS_CONFIG = 5,
  MTAIL_STATUS_UNAVAILABLE = 6,
  MTAIL_STATUS_IO = 7,
  MTAIL_STATUS_PARSE = 8,
  MTAIL_STATUS_NULL_POINTER = 9,
  MTAIL_STATUS_INVALID_UTF8 = 10,
  MTAIL_STATUS_PANIC = 11,
} MtailStatus;

typedef enum MtailMethod {
  MTAIL_METHOD_PLAIN_CLOPPER_PEARSON = 0,
  MTAIL_METHOD_IMPORTANCE_SAMPLED = 1,
  MTAIL_METHOD_EXHAUSTIVE = 2,
} MtailMethod;

/**
 * Opaque martingale model.
 */
typedef struct MtailModel MtailModel;

/**
 * Opaque Bernstein parameter pair `(ε, δ)`.
 */
typedef struct MtailParams MtailParams;

/**
 * Envelope value at one point. `xhat` and `lambda_bar` are NaN when the
 * envelope does not use them.
 */
typedef struct MtailEnvelope {
  double x;
  double value;
  double log_value;
  double xhat;
  double lambda_bar;
} MtailEnvelope;

typedef struct MtailTailEstimate {
  double x;
  double p_hat;
  double ci_lo;
  double ci_hi;
  double std_error;
  double effective_samples;
  double tilt;
  uint64_t hits;
  uint64_t paths;
  enum MtailMethod method;
} MtailTailEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *mtail_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mtail_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MtailStatus mtail_params_new(double epsilon, double delta, struct MtailParams **out);

/**
 * # Safety
 * `params` must be null or a handle from `mtail_params_new` or
 * `mtail_model_params` that has not been freed.
 */
void mtail_params_free(struct MtailParams *params);

/**
 * Builds a model from its JSON definition.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MtailStatus mtail_model_from_json(const char *json, struct MtailModel **out);

/**
 * `n` independent Rademacher steps of size `n^{-1/2}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MtailStatus mtail_model_rademacher(size_t n, struct MtailModel **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MtailStatus mtail_model_variance_switch(size_t n, double delta, struct MtailModel **out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
void mtail_model_free(struct MtailModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum MtailStatus mtail_model_len(const struct MtailModel *model, size_t *out);

/**
 * The `(ε, δ)` the model satisfies, as a new parameter handle.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum MtailStatus mtail_model_params(const struct MtailModel *model, struct MtailParams **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MtailStatus mtail_std_normal_sf(double x, double *out);

/**
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum MtailStatus mtail_tail_bound_sq(double x,
                                     const struct MtailParams *params,
                                     struct MtailEnvelope *out);

/**
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum MtailStatus mtail_strengthened_tail(double x,
                                         const struct MtailParams *params,
                                         double c,
                                         struct MtailEnvelope *out);

/**
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum MtailStatus mtail_nonuniform_be(double x,
                                     const struct MtailParams *params,
                                     double c,
                                     struct MtailEnvelope *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum MtailStatus mtail_corollary(double x,
                                 double epsilon,
                                 double qc_l1,
                                 double c,
                                 struct MtailEnvelope *out);

/**
 * Estimates `P(Sₙ > x)`. `workers = 0` uses every core; results do not
 * depend on it. With `importance` set the default exponential tilt is used.
 * Small laws are enumerated exactly.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum MtailStatus mtail_estimate_tail(const struct MtailModel *model,
                                     double x,
                                     uint64_t paths,
                                     uint64_t seed,
                                     size_t workers,
                                     bool importance,
                                     struct MtailTailEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MTAIL_H */
