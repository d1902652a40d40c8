#ifndef MADD_H
#define MADD_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status values. Error codes from 10 upward match the `madd` CLI exit codes.
 */
typedef enum MaddStatus {
  MADD_STATUS_OK = 0,
  MADD_STATUS_NULL_POINTER = 1,
  MADD_STATUS_BUFFER_TOO_SMALL = 2,
  MADD_STATUS_PANIC = 3,
  MADD_STATUS_EMPTY_POPULATION = 10,
  MADD_STATUS_INVALID_PROBABILITY = 11,
  MADD_STATUS_INVALID_BIN_COUNT = 12,
  MADD_STATUS_BIN_COUNT_MISMATCH = 13,
  MADD_STATUS_INVALID_BANDWIDTH = 14,
  MADD_STATUS_INVALID_DENSITY = 15,
  MADD_STATUS_INVALID_QUANTILE = 16,
  MADD_STATUS_EMPTY_GROUP = 17,
  MADD_STATUS_INVALID_LAMBDA = 18,
  MADD_STATUS_LENGTH_MISMATCH = 19,
  MADD_STATUS_MISSING_LABELS = 20,
  MADD_STATUS_INVALID_CONFIG = 21,
  MADD_STATUS_ENCODING_ERROR = 22,
  MADD_STATUS_INVALID_RATIOS = 23,
  MADD_STATUS_TRAINING_DIVERGED = 24,
  MADD_STATUS_NOT_TRAINED = 25,
  MADD_STATUS_PARSE = 26,
  MADD_STATUS_IO = 27,
  MADD_STATUS_CSV = 28,
  MADD_STATUS_JSON = 29,
} MaddStatus;

/**
 * Precomputed remapping for a batch of scored records.
 */
typedef struct MaddFip MaddFip;

/**
 * Result of a lambda sweep.
 */
typedef struct MaddSweep MaddSweep;

/**
 * One row of a sweep.
 */
typedef struct MaddSweepRow {
  double lambda;
  double accuracy_loss;
  double fairness_loss;
  double total_loss;
} MaddSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *madd_version(void);

/**
 * Message for the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next library call on the same thread.
 */
const char *madd_last_error(void);

/**
 * MADD between the histograms of two probability samples with `m` bins.
 *
 * # Safety
 * `p0`/`p1` must point to `n0`/`n1` readable doubles; `out` must be writable.
 */
enum MaddStatus madd_metric(const double *p0,
                            size_t n0,
                            const double *p1,
                            size_t n1,
                            size_t m,
                            double *out);

/**
 * Builds a remapping handle from `n` probabilities and group ids (0 or 1).
 *
 * # Safety
 * `probas` and `groups` must hold `n` elements; `out` must be writable.
 */
enum MaddStatus madd_fip_new(const double *probas,
                             const uint8_t *groups,
                             size_t n,
                             size_t m,
                             struct MaddFip **out);

/**
 * Number of records held by the handle; 0 for a null handle.
 *
 * # Safety
 * `fip` must be null or a live handle.
 */
size_t madd_fip_len(const struct MaddFip *fip);

/**
 * Writes the remapped probabilities of the handle's records, in input order.
 *
 * # Safety
 * `fip` must be a live handle and `out` must hold `out_len` writable doubles.
 */
enum MaddStatus madd_fip_apply(const struct MaddFip *fip,
                               double lambda,
                               double *out,
                               size_t out_len);

/**
 * Remaps a single probability as a member of `group`.
 *
 * # Safety
 * `fip` must be a live handle; `out` must be writable.
 */
enum MaddStatus madd_fip_map_value(const struct MaddFip *fip,
                                   double lambda,
                                   double proba,
                                   uint8_t group_id,
                                   double *out);

/**
 * # Safety
 * `fip` must be null or a handle from [`madd_fip_new`] not yet freed.
 */
void madd_fip_free(struct MaddFip *fip);

/**
 * Sweeps `grid_size` evenly spaced lambdas over `[0, 1]`. Labels are 0 or
 * nonzero.
 *
 * # Safety
 * `probas`, `groups` and `labels` must hold `n` elements; `out` must be writable.
 */
enum MaddStatus madd_sweep_new(const double *probas,
                               const uint8_t *groups,
                               const uint8_t *labels,
                               size_t n,
                               double theta,
                               double threshold,
                               size_t m,
                               size_t grid_size,
                               struct MaddSweep **out);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
size_t madd_sweep_len(const struct MaddSweep *sweep);

/**
 * # Safety
 * `sweep` must be a live handle; `out` must be writable.
 */
enum MaddStatus madd_sweep_row(const struct MaddSweep *sweep,
                               size_t index,
                               struct MaddSweepRow *out);

/**
 * Minimizing lambda (largest on ties); NaN for a null handle.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
double madd_sweep_lambda_star(const struct MaddSweep *sweep);

/**
 * # Safety
 * `sweep` must be null or a live handle.
 */
double madd_sweep_min_total_loss(const struct MaddSweep *sweep);

/**
 * # Safety
 * `sweep` must be null or a handle from [`madd_sweep_new`] not yet freed.
 */
void madd_sweep_free(struct MaddSweep *sweep);

/**
 * Draws the default two-group simulation with the given sizes and seed.
 * Buffers must hold `n_g0 + n_g1` elements; group 0 records come first.
 *
 * # Safety
 * All output pointers must hold `len` writable elements.
 */
enum MaddStatus madd_simulate(size_t n_g0,
                              size_t n_g1,
                              uint64_t seed,
                              double *probas,
                              uint8_t *groups,
                              uint8_t *labels,
                              size_t len);

/**
 * Human-readable name of a status value as a static string.
 */
const char *madd_status_name(enum MaddStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MADD_H */
