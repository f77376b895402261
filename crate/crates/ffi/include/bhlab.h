#ifndef BHLAB_H
#define BHLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum BhStatus {
  BH_STATUS_OK = 0,
  BH_STATUS_NULL_POINTER = 1,
  BH_STATUS_INVALID_UTF8 = 2,
  BH_STATUS_INVALID_JSON = 3,
  BH_STATUS_INVALID_DOMAIN = 4,
  BH_STATUS_POINT_OUTSIDE_DOMAIN = 5,
  BH_STATUS_INVALID_ARGUMENT = 6,
  BH_STATUS_INVALID_CONFIG = 7,
  // The walk hit its step budget or the origin exclusion.
  BH_STATUS_SAMPLER_FAILURE = 8,
  // Not enough data for the requested estimate.
  BH_STATUS_ESTIMATOR_FAILURE = 9,
  BH_STATUS_MEAN_INFINITE = 10,
  BH_STATUS_UNKNOWN_EXPERIMENT = 11,
  BH_STATUS_BUFFER_TOO_SMALL = 12,
  BH_STATUS_IO = 13,
  BH_STATUS_PANIC = 14,
  BH_STATUS_OTHER = 15,
} BhStatus;

// Opaque batch of exit samples.
typedef struct BhBatch BhBatch;

// Opaque domain handle.
typedef struct BhDomain BhDomain;

// Tail-index fit.
typedef struct BhTail {
  double exponent;
  double ci_low;
  double ci_high;
  double window_low;
  double window_high;
  size_t n_window;
} BhTail;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on this thread.
const char *bh_last_error_message(void);

// Library version, static.
const char *bh_version(void);

// Parses a domain from JSON, e.g. `{"kind":"wedge","half_angle":0.5}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out_domain` writable.
enum BhStatus bh_domain_from_json(const char *json, struct BhDomain **out_domain);

// # Safety
// `d` must come from [`bh_domain_from_json`] and not be freed already.
void bh_domain_free(struct BhDomain *d);

// # Safety
// `d` must be a live handle and `inside` writable.
enum BhStatus bh_domain_contains(const struct BhDomain *d, double x, double y, bool *inside);

// Distance from an interior point to the boundary.
//
// # Safety
// `d` must be a live handle and `dist` writable.
enum BhStatus bh_domain_distance(const struct BhDomain *d, double x, double y, double *dist);

// Samples `n` exit times from `(x, y)`. `sampler_json` may be null for the
// default sampler settings; otherwise it is a partial sampler config.
//
// # Safety
// `d` must be a live handle, `sampler_json` null or NUL-terminated, and
// `out_batch` writable.
enum BhStatus bh_sample_batch(const struct BhDomain *d,
                              double x,
                              double y,
                              const char *sampler_json,
                              size_t n,
                              struct BhBatch **out_batch);

// # Safety
// `b` must come from [`bh_sample_batch`] and not be freed already.
void bh_batch_free(struct BhBatch *b);

// # Safety
// `b` must be a live handle and both out-pointers writable.
enum BhStatus bh_batch_counts(const struct BhBatch *b, size_t *len, size_t *truncated);

// Copies the exit times into `buf`; truncated samples hold the horizon.
// `written` receives the batch length, also when `cap` is too small.
//
// # Safety
// `buf` must have room for `cap` doubles; `written` must be writable.
enum BhStatus bh_batch_times(const struct BhBatch *b, double *buf, size_t cap, size_t *written);

// Log-log tail-index fit over the default window. A NaN `lower_quantile`
// keeps the default.
//
// # Safety
// `b` must be a live handle and `tail` writable.
enum BhStatus bh_batch_tail_index(const struct BhBatch *b,
                                  double lower_quantile,
                                  struct BhTail *tail);

// Closed-form mean exit time of the wedge `|arg z| < alpha` from `(x, y)`.
//
// # Safety
// `mean` must be writable.
enum BhStatus bh_wedge_mean(double alpha, double x, double y, double *mean);

// Runs experiment `name` and returns its report as JSON in `out_json`.
// `params_json` may be null for the defaults. A `samples` of 0 keeps the
// configured sample count.
//
// # Safety
// `name` must be NUL-terminated, `params_json` null or NUL-terminated, and
// `out_json` writable. Release the result with [`bh_string_free`].
enum BhStatus bh_run_experiment(const char *name,
                                const char *params_json,
                                uint64_t seed,
                                size_t samples,
                                char **out_json);

// # Safety
// `s` must come from this library and not be freed already.
void bh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BHLAB_H */
