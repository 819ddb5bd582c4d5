#ifndef FINITE_IBM_H
#define FINITE_IBM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum {
  FIBM_STATUS_OK = 0,
  FIBM_STATUS_NULL_POINTER = 1,
  FIBM_STATUS_INVALID_PARAMETER = 2,
  FIBM_STATUS_NUMERICAL = 3,
  FIBM_STATUS_IO = 4,
  FIBM_STATUS_OUT_OF_BOUNDS = 5,
  FIBM_STATUS_PANIC = 6,
} FibmStatus;

/**
 * Recorded SDE paths.
 */
typedef struct FibmEnsemble FibmEnsemble;

/**
 * Model description.
 */
typedef struct FibmModel FibmModel;

/**
 * Equilibrium samples, one configuration each.
 */
typedef struct FibmSamples FibmSamples;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fibm_last_error(char *buf, size_t len);

/**
 * Creates a model. `family` is one of airy, ginibre, bessel, square-bessel,
 * sqrt-square-bessel, lennard-jones, riesz. Pass NaN for an unused `alpha`
 * and 0 for an unused `riesz_a`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
FibmStatus fibm_model_new(const char *family,
                          size_t n,
                          double beta,
                          double alpha,
                          uint32_t riesz_a,
                          FibmModel **out);

/**
 * # Safety
 * `model` must come from `fibm_model_new` and not be used afterwards.
 */
void fibm_model_free(FibmModel *model);

/**
 * Spatial dimension of the model.
 *
 * # Safety
 * `model` must be a live handle.
 */
FibmStatus fibm_model_dimension(const FibmModel *model, size_t *out);

/**
 * Finite-N drift of every particle. `coords` holds n * d values,
 * point-major; `out` receives as many.
 *
 * # Safety
 * `coords` and `out` must hold `len` values.
 */
FibmStatus fibm_drift(const FibmModel *model, const double *coords, double *out, size_t len);

/**
 * Draws `n_samples` equilibrium configurations; sample k uses stream
 * (seed, k).
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
FibmStatus fibm_sample(const FibmModel *model, size_t n_samples, uint64_t seed, FibmSamples **out);

/**
 * # Safety
 * `samples` must be a live handle or null.
 */
void fibm_samples_free(FibmSamples *samples);

/**
 * Number of configurations.
 *
 * # Safety
 * `samples` must be a live handle.
 */
FibmStatus fibm_samples_count(const FibmSamples *samples, size_t *out);

/**
 * Copies configuration `k` (point-major coordinates) into `buf`. `needed`
 * receives the number of values, also when `buf` is too small.
 *
 * # Safety
 * `buf` must hold `len` values; `needed` must be writable or null.
 */
FibmStatus fibm_samples_get(const FibmSamples *samples,
                            size_t k,
                            double *buf,
                            size_t len,
                            size_t *needed);

/**
 * Integrates one path from each sample with the default integrator
 * settings except for the time grid; path p uses stream (seed, p).
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
FibmStatus fibm_simulate(const FibmModel *model,
                         const FibmSamples *initial,
                         double dt,
                         double t_final,
                         double dt_record,
                         uint64_t seed,
                         FibmEnsemble **out);

/**
 * # Safety
 * `ens` must be a live handle or null.
 */
void fibm_ensemble_free(FibmEnsemble *ens);

/**
 * Number of paths and of recorded times.
 *
 * # Safety
 * `ens` must be a live handle; outputs must be writable.
 */
FibmStatus fibm_ensemble_shape(const FibmEnsemble *ens, size_t *n_paths, size_t *n_records);

/**
 * Copies the labelled state of `path` at record `record` into `buf` and
 * its time into `time`.
 *
 * # Safety
 * `buf` must hold `len` values; `time` must be writable or null.
 */
FibmStatus fibm_ensemble_get(const FibmEnsemble *ens,
                             size_t path,
                             size_t record,
                             double *buf,
                             size_t len,
                             double *time);

/**
 * Kernel value K(x, y) for kernel airy2, bessel (needs `alpha`) or ginibre
 * (x and y are points of the plane, two values each).
 *
 * # Safety
 * `x` and `y` must hold the kernel dimension; outputs must be writable.
 */
FibmStatus fibm_kernel_eval(const char *kernel,
                            double alpha,
                            const double *x,
                            const double *y,
                            double *re,
                            double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINITE_IBM_H */
