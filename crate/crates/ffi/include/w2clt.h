#ifndef W2CLT_H
#define W2CLT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero input, domain and capacity codes match the
 * exit codes of the command-line tool.
 */
typedef enum W2cltStatus {
  W2CLT_STATUS_OK = 0,
  W2CLT_STATUS_NULL_POINTER = 1,
  W2CLT_STATUS_INVALID_INPUT = 2,
  W2CLT_STATUS_DOMAIN = 3,
  W2CLT_STATUS_CAPACITY = 4,
  W2CLT_STATUS_IO = 5,
  W2CLT_STATUS_PANIC = 6,
} W2cltStatus;

/**
 * Opaque distribution handle.
 */
typedef struct W2cltDist W2cltDist;

typedef struct W2cltMoments {
  double mean;
  double variance;
  double fourth_moment;
} W2cltMoments;

typedef struct W2cltReport {
  double distance;
  double squared_distance;
  double error_bound;
} W2cltReport;

typedef struct W2cltContraction {
  double lhs;
  double rhs;
  double margin;
} W2cltContraction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *w2clt_last_error(void);

/**
 * Builds a distribution from `len` positions and weights.
 *
 * # Safety
 * `positions` and `weights` must point to `len` readable doubles; `out`
 * must be writable.
 */
enum W2cltStatus w2clt_dist_new(const double *positions,
                                const double *weights,
                                size_t len,
                                struct W2cltDist **out);

/**
 * Parses `{"atoms": [[position, weight], ...]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_from_json(const char *json, struct W2cltDist **out);

/**
 * Serializes to JSON; release the string with `w2clt_string_free`.
 *
 * # Safety
 * `d` must be a live handle or null; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_to_json(const struct W2cltDist *d, char **out);

/**
 * # Safety
 * `d` must come from this library and not be used afterwards. Null is a no-op.
 */
void w2clt_dist_free(struct W2cltDist *d);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is a no-op.
 */
void w2clt_string_free(char *s);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_len(const struct W2cltDist *d, size_t *out);

/**
 * Copies the atoms into caller buffers of `capacity` entries; fails with
 * `InvalidInput` when `capacity` is smaller than the atom count.
 *
 * # Safety
 * `positions` and `weights` must be writable for `capacity` doubles.
 */
enum W2cltStatus w2clt_dist_atoms(const struct W2cltDist *d,
                                  double *positions,
                                  double *weights,
                                  size_t capacity);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_cdf(const struct W2cltDist *d, double x, double *out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_quantile(const struct W2cltDist *d, double t, double *out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_moments(const struct W2cltDist *d, struct W2cltMoments *out);

/**
 * Law of `a + b` for independent summands.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_convolve(const struct W2cltDist *a,
                                     const struct W2cltDist *b,
                                     struct W2cltDist **out);

/**
 * Law of `(a + b) / sqrt 2` for independent summands.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_normalized_sum(const struct W2cltDist *a,
                                           const struct W2cltDist *b,
                                           struct W2cltDist **out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_quantize(const struct W2cltDist *d,
                                     size_t bins,
                                     struct W2cltDist **out);

/**
 * Law of `scale * X + shift`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_affine(const struct W2cltDist *d,
                                   double scale,
                                   double shift,
                                   struct W2cltDist **out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_dist_standardize(const struct W2cltDist *d, struct W2cltDist **out);

/**
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum W2cltStatus w2clt_w2_discrete(const struct W2cltDist *a,
                                   const struct W2cltDist *b,
                                   struct W2cltReport *out);

/**
 * Distance to the standard normal law.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_w2_to_gaussian(const struct W2cltDist *d, struct W2cltReport *out);

/**
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum W2cltStatus w2clt_contraction_check(const struct W2cltDist *a,
                                         const struct W2cltDist *b,
                                         struct W2cltContraction *out);

/**
 * Renormalization trace as CSV text; release with `w2clt_string_free`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum W2cltStatus w2clt_rg_trace_csv(const struct W2cltDist *d,
                                    size_t iterations,
                                    size_t max_support,
                                    char **out);

double w2clt_gaussian_cdf(double z);

/**
 * # Safety
 * `out` must be writable.
 */
enum W2cltStatus w2clt_gaussian_quantile(double t, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* W2CLT_H */
