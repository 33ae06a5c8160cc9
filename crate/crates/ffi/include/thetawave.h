#ifndef THETAWAVE_H
#define THETAWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum TwStatus {
  TW_STATUS_OK = 0,
  TW_STATUS_NULL_POINTER = 1,
  TW_STATUS_INVALID_PARAMS = 2,
  TW_STATUS_DOMAIN = 3,
  TW_STATUS_NUMERICAL = 4,
  TW_STATUS_REALITY_REJECTED = 5,
  TW_STATUS_BUFFER_TOO_SMALL = 6,
  TW_STATUS_PANIC = 7,
} TwStatus;

/**
 * Opaque solution handle.
 */
typedef struct TwSolution TwSolution;

/**
 * The seven curve integrals.
 */
typedef struct TwConstants {
  double a_plus;
  double b_plus;
  double a_minus;
  double b_minus;
  double b1_minus;
  double d_minus;
  double f_minus;
} TwConstants;

/**
 * Derived solution parameters.
 */
typedef struct TwParams {
  double frb_minus;
  double frb_plus;
  double kappa1;
  double k;
  double kappa2;
  double delta;
  double k0_re;
  double k0_im;
  double k1;
  double k2;
} TwParams;

/**
 * Periods and lattice translations; `t_prime` is valid when
 * `has_t_prime` is nonzero.
 */
typedef struct TwPeriods {
  double x;
  double t;
  double t_prime;
  int32_t has_t_prime;
  double x1;
  double t1;
  double x2;
  double t2;
} TwPeriods;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a solution handle. On success `*out` owns a handle that must be
 * released with [`tw_solution_free`].
 *
 * # Safety
 * `out` must be null or valid for one pointer write.
 */
enum TwStatus tw_solution_new(double lambda0,
                              double a,
                              double b,
                              double c,
                              double z_re1,
                              double z_im1,
                              double z_re2,
                              double z_im2,
                              struct TwSolution **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `h` must be null or come from [`tw_solution_new`] and not be freed yet.
 */
void tw_solution_free(struct TwSolution *h);

/**
 * Add `dk2` to `K2`, e.g. to run a negative control.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum TwStatus tw_solution_shift_k2(struct TwSolution *h, double dk2);

/**
 * `p(x, t)`.
 *
 * # Safety
 * `h` must be a live handle; `re` and `im` valid for one write each.
 */
enum TwStatus tw_solution_eval(const struct TwSolution *h,
                               double x,
                               double t,
                               double *re,
                               double *im);

/**
 * `|p(x, t)|²` from the theta-product form.
 *
 * # Safety
 * `h` must be a live handle; `out` valid for one write.
 */
enum TwStatus tw_solution_amp2(const struct TwSolution *h, double x, double t, double *out);

/**
 * # Safety
 * `h` must be a live handle; `out` valid for one write.
 */
enum TwStatus tw_solution_constants(const struct TwSolution *h, struct TwConstants *out);

/**
 * # Safety
 * `h` must be a live handle; `out` valid for one write.
 */
enum TwStatus tw_solution_params(const struct TwSolution *h, struct TwParams *out);

/**
 * # Safety
 * `h` must be a live handle; `out` valid for one write.
 */
enum TwStatus tw_solution_periods(const struct TwSolution *h, struct TwPeriods *out);

/**
 * Sample `|p|` on an `nx × nt` grid into `out[i * nt + j]`.
 *
 * # Safety
 * `h` must be a live handle; `out` valid for `len` writes.
 */
enum TwStatus tw_sample_abs(const struct TwSolution *h,
                            double x0,
                            double x1,
                            double t0,
                            double t1,
                            size_t nx,
                            size_t nt,
                            double *out,
                            size_t len);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t tw_last_error(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *tw_status_string(enum TwStatus status);

const char *tw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THETAWAVE_H */
