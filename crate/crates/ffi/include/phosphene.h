#ifndef PHOSPHENE_H
#define PHOSPHENE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PhStatus {
  PH_STATUS_OK = 0,
  PH_STATUS_NULL_POINTER = 1,
  PH_STATUS_ARGUMENT = 2,
  PH_STATUS_FORMAT = 3,
  PH_STATUS_DATA = 4,
  PH_STATUS_PARAMETER = 5,
  PH_STATUS_FIT = 6,
  PH_STATUS_DEGENERATE_VARIANCE = 7,
  PH_STATUS_IO = 8,
  PH_STATUS_BUFFER_TOO_SMALL = 9,
  PH_STATUS_PANIC = 10,
} PhStatus;

typedef enum PhModel {
  PH_MODEL_SPECTRAL = 0,
  PH_MODEL_EXPONENTIAL = 1,
  PH_MODEL_BASELINE = 2,
} PhModel;

/**
 * A loaded dataset.
 */
typedef struct PhDataset PhDataset;

/**
 * A fitted parameter set.
 */
typedef struct PhFit PhFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ph_last_error_message(void);

/**
 * Loads a dataset CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PhStatus ph_dataset_load(const char *path, struct PhDataset **out);

/**
 * Releases a dataset. Null is ignored.
 *
 * # Safety
 * `ds` must come from [`ph_dataset_load`] and not be used afterwards.
 */
void ph_dataset_free(struct PhDataset *ds);

/**
 * Number of trials in `ds`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PhStatus ph_dataset_trial_count(const struct PhDataset *ds, uintptr_t *out);

/**
 * Subject, pulse rate, duration and sample count of trial `index` (trials are sorted by subject, then condition).
 *
 * # Safety
 * Pointers must be valid.
 */
enum PhStatus ph_dataset_trial_info(const struct PhDataset *ds,
                                    uintptr_t index,
                                    uint32_t *subject_id,
                                    double *freq_pps,
                                    double *duration_s,
                                    uintptr_t *n_samples);

/**
 * Fits one model to trial `index` on its own. `m` applies to the spectral model only.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PhStatus ph_fit_descriptive(const struct PhDataset *ds,
                                 uintptr_t index,
                                 enum PhModel model,
                                 uintptr_t m,
                                 uint64_t seed,
                                 uintptr_t restarts,
                                 struct PhFit **out);

/**
 * Releases a fit. Null is ignored.
 *
 * # Safety
 * `fit` must come from a `ph_fit_*` call and not be used afterwards.
 */
void ph_fit_free(struct PhFit *fit);

/**
 * Mean per-trial MSE at the fitted parameters.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PhStatus ph_fit_objective(const struct PhFit *fit, double *out);

/**
 * Writes the fitted parameters as NUL-terminated JSON into `buf`.
 *
 * `needed` receives the required size including the NUL. With a null `buf`
 * or a too-small `capacity`, nothing is written and `BufferTooSmall` is
 * returned (null `buf` with a non-null `needed` is the size query).
 *
 * # Safety
 * `buf` must hold `capacity` bytes; `needed` may be null.
 */
enum PhStatus ph_fit_params_json(const struct PhFit *fit,
                                 char *buf,
                                 uintptr_t capacity,
                                 uintptr_t *needed);

/**
 * Predicts brightness on the grid `0, dt, …, (n - 1)·dt` for the given stimulus.
 *
 * # Safety
 * `out` must hold `n` doubles.
 */
enum PhStatus ph_fit_predict(const struct PhFit *fit,
                             double freq_pps,
                             double duration_s,
                             double dt,
                             uintptr_t n,
                             double *out);

/**
 * Mean squared error of two length-`n` series.
 *
 * # Safety
 * `a` and `b` must hold `n` doubles.
 */
enum PhStatus ph_mse(const double *a, const double *b, uintptr_t n, double *out);

/**
 * Pearson correlation of two length-`n` series; `DegenerateVariance` for constant input.
 *
 * # Safety
 * `a` and `b` must hold `n` doubles.
 */
enum PhStatus ph_pearson_r(const double *a, const double *b, uintptr_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOSPHENE_H */
