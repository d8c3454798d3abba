#ifndef ROBUST_SSALT_H
#define ROBUST_SSALT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RssaltStatus {
  RSSALT_STATUS_OK = 0,
  RSSALT_STATUS_NULL_POINTER = 1,
  RSSALT_STATUS_INVALID_INPUT = 2,
  RSSALT_STATUS_DATA = 3,
  RSSALT_STATUS_ESTIMATION = 4,
  RSSALT_STATUS_NUMERIC = 5,
  RSSALT_STATUS_CONFIG = 6,
  RSSALT_STATUS_PANIC = 7,
} RssaltStatus;

typedef enum RssaltCharacteristic {
  // `arg` is the mission time.
  RSSALT_CHARACTERISTIC_RELIABILITY = 0,
  // `arg` is the reliability level.
  RSSALT_CHARACTERISTIC_QUANTILE = 1,
  // `arg` is ignored.
  RSSALT_CHARACTERISTIC_MEAN = 2,
} RssaltCharacteristic;

// Opaque fit result.
typedef struct RssaltFit RssaltFit;

// Opaque stress plan.
typedef struct RssaltPlan RssaltPlan;

// Point estimate with both interval families.
typedef struct RssaltInterval {
  double value;
  double std_error;
  double direct_lo;
  double direct_hi;
  double transformed_lo;
  double transformed_hi;
} RssaltInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *rssalt_last_error(void);

// Builds a plan. `change_times` has one entry per level, the last being the
// termination time; every change time must also be an inspection time.
//
// # Safety
// Array arguments must point to the stated number of doubles; `out` must be
// writable.
enum RssaltStatus rssalt_plan_new(const double *levels,
                                  size_t n_levels,
                                  const double *change_times,
                                  size_t n_change_times,
                                  const double *inspection_times,
                                  size_t n_inspections,
                                  struct RssaltPlan **out);

// # Safety
// `plan` must be null or come from [`rssalt_plan_new`] and not be freed twice.
void rssalt_plan_free(struct RssaltPlan *plan);

// Number of cells, `L + 1`; 0 for a null plan.
//
// # Safety
// `plan` must be null or a live handle.
size_t rssalt_plan_n_cells(const struct RssaltPlan *plan);

// Writes the `L + 1` cell probabilities at θ = (a0, a1, eta) into `out`.
//
// # Safety
// `plan` must be a live handle and `out` must hold `len` doubles.
enum RssaltStatus rssalt_cell_probabilities(const struct RssaltPlan *plan,
                                            double a0,
                                            double a1,
                                            double eta,
                                            double *out,
                                            size_t len);

// Fits the MDPDE with tuning parameter `beta` to `L + 1` counts (last =
// survivors). A fit that ran but did not converge is still returned; check
// [`rssalt_fit_converged`].
//
// # Safety
// `plan` must be a live handle, `counts` must hold `len` values and `out`
// must be writable.
enum RssaltStatus rssalt_fit(const struct RssaltPlan *plan,
                             const uint64_t *counts,
                             size_t len,
                             double beta,
                             struct RssaltFit **out);

// # Safety
// `fit` must be null or come from [`rssalt_fit`] and not be freed twice.
void rssalt_fit_free(struct RssaltFit *fit);

// 1 when converged, 0 otherwise or for a null handle.
//
// # Safety
// `fit` must be null or a live handle.
int32_t rssalt_fit_converged(const struct RssaltFit *fit);

// Writes (a0, a1, eta).
//
// # Safety
// `fit` must be a live handle and `out` must hold 3 doubles.
enum RssaltStatus rssalt_fit_params(const struct RssaltFit *fit, double *out);

// Writes `Var(θ̂) = Σ/N` row-major into 9 doubles.
//
// # Safety
// `fit` must be a live handle and `out` must hold 9 doubles.
enum RssaltStatus rssalt_fit_covariance(const struct RssaltFit *fit, double *out);

// Lifetime characteristic at normalized stress `x0` with intervals at
// level `confidence`.
//
// # Safety
// `fit` must be a live handle and `out` writable.
enum RssaltStatus rssalt_characteristic(const struct RssaltFit *fit,
                                        enum RssaltCharacteristic kind,
                                        double arg,
                                        double x0,
                                        double confidence,
                                        struct RssaltInterval *out);

// Reliability at mission time `t`, shorthand for [`rssalt_characteristic`].
//
// # Safety
// As for [`rssalt_characteristic`].
enum RssaltStatus rssalt_reliability(const struct RssaltFit *fit,
                                     double x0,
                                     double t,
                                     double confidence,
                                     struct RssaltInterval *out);

// Wald-type test of `C θ = d`, with `rows` holding `n_rows` groups of
// `c0, c1, c2, d`.
//
// # Safety
// `fit` must be a live handle, `rows` must hold `4 * n_rows` doubles and
// both outputs must be writable.
enum RssaltStatus rssalt_wald_linear(const struct RssaltFit *fit,
                                     const double *rows,
                                     size_t n_rows,
                                     double *statistic,
                                     double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_SSALT_H */
