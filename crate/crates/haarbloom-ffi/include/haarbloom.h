#ifndef HAARBLOOM_H
#define HAARBLOOM_H

/* Generated by the haarbloom-ffi build script; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this ABI.
 */
typedef enum HbStatus {
  /**
   * The call succeeded.
   */
  HB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  HB_STATUS_NULL_POINTER = 1,
  /**
   * A scalar or array argument violates the documented constraints.
   */
  HB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Two handles that must share a grid do not.
   */
  HB_STATUS_GRID_MISMATCH = 3,
  /**
   * A cube, level, or shift parameter lies outside the grid.
   */
  HB_STATUS_OUT_OF_RANGE = 4,
  /**
   * Values violate a numeric contract (positivity, size caps, ...).
   */
  HB_STATUS_NUMERIC_ERROR = 5,
  /**
   * Encoding or decoding failed.
   */
  HB_STATUS_SERIALIZATION_ERROR = 6,
  /**
   * The implementation panicked; state may be inconsistent.
   */
  HB_STATUS_INTERNAL_PANIC = 7,
} HbStatus;

/**
 * A dyadic grid (opaque).
 */
typedef struct HbGrid HbGrid;

/**
 * A dyadic shift operator (opaque).
 */
typedef struct HbShift HbShift;

/**
 * A function constant on finest-level cells (opaque).
 */
typedef struct HbStep HbStep;

/**
 * A positive weight on a grid (opaque).
 */
typedef struct HbWeight HbWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the most recent failure on this thread into `buf`
 * (NUL-terminated, truncated to `len`). Returns the full message length in
 * bytes, excluding the terminator. `buf` may be null to query the length.
 *
 * # Safety
 *
 * A non-null `buf` must be valid for writes of `len` bytes.
 */
size_t hb_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hb_version(void);

/**
 * Creates a grid of dimension `dim` subdivided `depth` times, rigidly
 * translated by `shift` (length `shift_len ≤ dim`, each component a
 * multiple of the finest cell side).
 *
 * # Safety
 *
 * `shift` must be null (with `shift_len` 0) or point to `shift_len`
 * readable doubles; `out` must be valid for one pointer write.
 */
enum HbStatus hb_grid_new(size_t dim,
                          uint32_t depth,
                          const double *shift,
                          size_t shift_len,
                          struct HbGrid **out);

/**
 * Releases a grid handle; null is ignored.
 *
 * # Safety
 *
 * `grid` must be null or a handle from this library, not yet freed.
 */
void hb_grid_free(struct HbGrid *grid);

/**
 * # Safety
 *
 * `grid` must be null or a live handle; `out` must be valid for one write.
 */
enum HbStatus hb_grid_dim(const struct HbGrid *grid, size_t *out);

/**
 * # Safety
 *
 * `grid` must be null or a live handle; `out` must be valid for one write.
 */
enum HbStatus hb_grid_depth(const struct HbGrid *grid, uint32_t *out);

/**
 * Number of finest-level cells; the length expected by every
 * pointer/length argument below.
 *
 * # Safety
 *
 * `grid` must be null or a live handle; `out` must be valid for one write.
 */
enum HbStatus hb_grid_cell_count(const struct HbGrid *grid, size_t *out);

/**
 * Wraps `values` (one per cell, row-major) as a function on `grid`.
 *
 * # Safety
 *
 * `grid` must be null or a live handle; `values` must point to `len`
 * readable doubles; `out` must be valid for one pointer write.
 */
enum HbStatus hb_step_new(const struct HbGrid *grid,
                          const double *values,
                          size_t len,
                          struct HbStep **out);

/**
 * Releases a function handle; null is ignored.
 *
 * # Safety
 *
 * `step` must be null or a handle from this library, not yet freed.
 */
void hb_step_free(struct HbStep *step);

/**
 * Copies the cell values into `buf` (length `len` = cell count).
 *
 * # Safety
 *
 * `step` must be null or a live handle; `buf` must be valid for `len`
 * double writes.
 */
enum HbStatus hb_step_values(const struct HbStep *step, double *buf, size_t len);

/**
 * # Safety
 *
 * `step` must be null or a live handle; `out` must be valid for one write.
 */
enum HbStatus hb_step_integral(const struct HbStep *step, double *out);

/**
 * Unweighted dyadic oscillation norm of `step`.
 *
 * # Safety
 *
 * `step` must be null or a live handle; `out` must be valid for one write.
 */
enum HbStatus hb_step_bmo_norm(const struct HbStep *step, double *out);

/**
 * Wraps strictly positive per-cell `values` as a weight on `grid`.
 *
 * # Safety
 *
 * `grid` must be null or a live handle; `values` must point to `len`
 * readable doubles; `out` must be valid for one pointer write.
 */
enum HbStatus hb_weight_new(const struct HbGrid *grid,
                            const double *values,
                            size_t len,
                            struct HbWeight **out);

/**
 * Releases a weight handle; null is ignored.
 *
 * # Safety
 *
 * `weight` must be null or a handle from this library, not yet freed.
 */
void hb_weight_free(struct HbWeight *weight);

/**
 * Draws a mean-one multiplicative cascade weight (deterministic in `seed`,
 * sibling ratios bounded by `ratio_bound ≥ 1`).
 *
 * # Safety
 *
 * `grid` must be null or a live handle; `out` must be valid for one
 * pointer write.
 */
enum HbStatus hb_weight_cascade(const struct HbGrid *grid,
                                double ratio_bound,
                                uint64_t seed,
                                struct HbWeight **out);

/**
 * Muckenhoupt characteristic of `weight` at exponent `p > 1`.
 *
 * # Safety
 *
 * `weight` must be null or a live handle; `out` must be valid for one
 * write.
 */
enum HbStatus hb_weight_ap(const struct HbWeight *weight, double p, double *out);

/**
 * The implied two-weight (Bloom) weight `(μ/λ)^{1/p}`.
 *
 * # Safety
 *
 * `mu` and `lambda` must be null or live handles; `out` must be valid for
 * one pointer write.
 */
enum HbStatus hb_weight_bloom(const struct HbWeight *mu,
                              const struct HbWeight *lambda,
                              double p,
                              struct HbWeight **out);

/**
 * Weighted oscillation norm of `b`; with `q = 1` the plain weighted form,
 * otherwise the q-exponent strengthening against the conjugate weight.
 *
 * # Safety
 *
 * `b` and `weight` must be null or live handles; `out` must be valid for
 * one write.
 */
enum HbStatus hb_bmo_weighted_norm(const struct HbStep *b,
                                   const struct HbWeight *weight,
                                   double q,
                                   double *out);

/**
 * Draws a random shift with parameters `(i, j)` on `grid`, deterministic
 * in `seed`. `dense` fills every admissible table slot; otherwise a sparse
 * random subset is used.
 *
 * # Safety
 *
 * `grid` must be null or a live handle; `out` must be valid for one
 * pointer write.
 */
enum HbStatus hb_shift_random(const struct HbGrid *grid,
                              uint32_t i,
                              uint32_t j,
                              uint64_t seed,
                              bool dense,
                              struct HbShift **out);

/**
 * Releases a shift handle; null is ignored.
 *
 * # Safety
 *
 * `shift` must be null or a handle from this library, not yet freed.
 */
void hb_shift_free(struct HbShift *shift);

/**
 * Applies the shift to `f`, producing a new function handle.
 *
 * # Safety
 *
 * `shift` and `f` must be null or live handles; `out` must be valid for
 * one pointer write.
 */
enum HbStatus hb_shift_apply(const struct HbShift *shift,
                             const struct HbStep *f,
                             struct HbStep **out);

/**
 * Exact `L²(μ) → L²(λ)` operator norm of the shift.
 *
 * # Safety
 *
 * `shift`, `mu`, and `lambda` must be null or live handles; `out` must be
 * valid for one write.
 */
enum HbStatus hb_shift_opnorm_l2(const struct HbShift *shift,
                                 const struct HbWeight *mu,
                                 const struct HbWeight *lambda,
                                 double *out);

/**
 * Witness-certified lower bound on the `L^p(μ) → L^p(λ)` norm
 * (`starts`/`iters` bound the iteration effort; 0 selects the defaults).
 *
 * # Safety
 *
 * `shift`, `mu`, and `lambda` must be null or live handles; `out` must be
 * valid for one write.
 */
enum HbStatus hb_shift_opnorm_lp(const struct HbShift *shift,
                                 const struct HbWeight *mu,
                                 const struct HbWeight *lambda,
                                 double p,
                                 size_t starts,
                                 size_t iters,
                                 double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HAARBLOOM_H */
