#ifndef COVTHRESH_H
#define COVTHRESH_H

#include <stddef.h>
#include <stdint.h>

typedef enum CtNorm {
  /*
   Maximum absolute column sum.
   */
  CT_NORM_ONE = 0,
  CT_NORM_FROBENIUS = 1,
  /*
   Largest absolute eigenvalue.
   */
  CT_NORM_OPERATOR = 2,
} CtNorm;

typedef enum CtRegularizer {
  CT_REGULARIZER_THRESHOLD = 0,
  CT_REGULARIZER_BAND = 1,
} CtRegularizer;

/*
 Result codes.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_ARGUMENT = 2,
  CT_STATUS_DIMENSION_MISMATCH = 3,
  CT_STATUS_NOT_SYMMETRIC = 4,
  CT_STATUS_NON_FINITE = 5,
  CT_STATUS_NOT_POSITIVE_DEFINITE = 6,
  CT_STATUS_NO_CONVERGENCE = 7,
  CT_STATUS_MISSING_DATA = 8,
  CT_STATUS_TOO_FEW_SAMPLES = 9,
  CT_STATUS_INSUFFICIENT_OVERLAP = 10,
  CT_STATUS_BUFFER_TOO_SMALL = 11,
  CT_STATUS_INTERNAL = 12,
} CtStatus;

/*
 Symmetric matrix handle.
 */
typedef struct CtMatrix CtMatrix;

/*
 Observation table handle (`n` rows, `p` columns).
 */
typedef struct CtObs CtObs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failure on this thread; empty after a
 success. Valid until the next call into this library on the same thread.
 */
const char *ct_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ct_version(void);

/*
 Copies an `n x p` row-major table; NaN marks a missing entry.

 # Safety
 `data` must point to `n * p` readable doubles and `out` must be writable.
 */
enum CtStatus ct_obs_new(const double *data, size_t n, size_t p, struct CtObs **out);

/*
 # Safety
 `x` must be null or a handle from [`ct_obs_new`] not yet freed.
 */
void ct_obs_free(struct CtObs *x);

/*
 # Safety
 `x` must be a live handle; `n` and `p` must be writable.
 */
enum CtStatus ct_obs_dims(const struct CtObs *x, size_t *n, size_t *p);

/*
 Copies a full `p x p` row-major matrix, which must be exactly symmetric.

 # Safety
 `data` must point to `p * p` readable doubles and `out` must be writable.
 */
enum CtStatus ct_matrix_new(const double *data, size_t p, struct CtMatrix **out);

/*
 # Safety
 `m` must be null or a handle returned by this library not yet freed.
 */
void ct_matrix_free(struct CtMatrix *m);

/*
 Dimension of `m`, or 0 when `m` is null.

 # Safety
 `m` must be null or a live handle.
 */
size_t ct_matrix_dim(const struct CtMatrix *m);

/*
 Copies all `p * p` entries row-major into `out` (capacity `len`).

 # Safety
 `m` must be a live handle and `out` must hold `len` writable doubles.
 */
enum CtStatus ct_matrix_copy(const struct CtMatrix *m, double *out, size_t len);

/*
 Sample covariance with divisor `n`; fails on missing data.

 # Safety
 `x` must be a live handle and `out` writable.
 */
enum CtStatus ct_sample_covariance(const struct CtObs *x, struct CtMatrix **out);

/*
 Covariance from pairwise-complete rows.

 # Safety
 `x` must be a live handle and `out` writable.
 */
enum CtStatus ct_pairwise_covariance(const struct CtObs *x, struct CtMatrix **out);

/*
 Ledoit-Wolf shrinkage towards a scaled identity. `intensity` may be
 null; otherwise it receives the shrinkage weight in `[0, 1]`.

 # Safety
 `x` must be a live handle, `out` writable, `intensity` null or writable.
 */
enum CtStatus ct_ledoit_wolf(const struct CtObs *x, struct CtMatrix **out, double *intensity);

/*
 Hard thresholding: entries with `|m_ij| < s` become zero. A nonzero
 `keep_diagonal` leaves the diagonal untouched.

 # Safety
 `m` must be a live handle and `out` writable.
 */
enum CtStatus ct_threshold(const struct CtMatrix *m,
                           double s,
                           int32_t keep_diagonal,
                           struct CtMatrix **out);

/*
 Keeps entries with `|i - j| <= k`.

 # Safety
 `m` must be a live handle and `out` writable.
 */
enum CtStatus ct_band(const struct CtMatrix *m, size_t k, struct CtMatrix **out);

/*
 Descending eigenvalues into `out` (capacity `len >= p`).

 # Safety
 `m` must be a live handle and `out` must hold `len` writable doubles.
 */
enum CtStatus ct_eigenvalues(const struct CtMatrix *m, double *out, size_t len);

/*
 # Safety
 `m` must be a live handle and `out` writable.
 */
enum CtStatus ct_norm(const struct CtMatrix *m, enum CtNorm which, double *out);

/*
 Chooses a threshold or band width by random sample splitting.

 `grid` may be null (with `grid_len == 0`) to use the default grid: every
 band width, or thresholds in steps of `sqrt(ln p / n) / subdivisions`.
 `train_fraction <= 0` sizes the second half as `n / ln n`; otherwise the
 first half holds that fraction of the rows.

 # Safety
 `x` must be a live handle, `grid` must hold `grid_len` readable doubles
 and `chosen` must be writable.
 */
enum CtStatus ct_select(const struct CtObs *x,
                        enum CtRegularizer kind,
                        const double *grid,
                        size_t grid_len,
                        size_t subdivisions,
                        size_t n_splits,
                        double train_fraction,
                        uint64_t seed,
                        double *chosen);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVTHRESH_H */
