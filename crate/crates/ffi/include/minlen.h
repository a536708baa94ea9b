#ifndef MINLEN_H
#define MINLEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum MinlenStatus {
  MINLEN_STATUS_OK = 0,
  MINLEN_STATUS_INVALID_INPUT = 1,
  MINLEN_STATUS_DOMAIN = 2,
  MINLEN_STATUS_ACCURACY = 3,
  MINLEN_STATUS_UNBOUNDED = 4,
  MINLEN_STATUS_SOLVER = 5,
  MINLEN_STATUS_UNSUPPORTED = 6,
  MINLEN_STATUS_NULL_POINTER = 7,
  MINLEN_STATUS_BUFFER_TOO_SMALL = 8,
  MINLEN_STATUS_PANIC = 9,
} MinlenStatus;

typedef enum MinlenKind {
  MINLEN_KIND_KMM = 0,
  MINLEN_KIND_COSH = 1,
  MINLEN_KIND_QUARTIC = 2,
  MINLEN_KIND_POLY = 3,
} MinlenKind;

/**
 * Opaque momentum map `p(k)` of a modification.
 */
typedef struct MinlenMap MinlenMap;

/**
 * Refined ground state of `H_λ` and its variances.
 */
typedef struct MinlenSolution {
  double lambda;
  double energy;
  double delta_x;
  double delta_p;
  double error_estimate;
} MinlenSolution;

typedef struct MinlenTradeoffPoint {
  double lambda;
  double u;
  double delta_x;
  double delta_p;
} MinlenTradeoffPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the momentum map of a modification. `coefficients` (length
 * `coefficient_count`) are read only for `MINLEN_KIND_POLY`, where `beta`
 * is ignored. On success `*out` receives a handle owned by the caller.
 *
 * # Safety
 * `out` must be valid for writes; `coefficients` must point to
 * `coefficient_count` readable doubles when the count is non-zero.
 */
enum MinlenStatus minlen_map_new(enum MinlenKind kind,
                                 double beta,
                                 const double *coefficients,
                                 size_t coefficient_count,
                                 double tol,
                                 struct MinlenMap **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `map` must be null or a handle from [`minlen_map_new`] not yet freed.
 */
void minlen_map_free(struct MinlenMap *map);

/**
 * Cut-off `k_max`; infinity for unbounded maps.
 *
 * # Safety
 * `map` must be a live handle and `out` valid for writes.
 */
enum MinlenStatus minlen_map_kmax(const struct MinlenMap *map, double *out);

/**
 * Modified momentum `p(k)` for `|k| < k_max`.
 *
 * # Safety
 * `map` must be a live handle and `out` valid for writes.
 */
enum MinlenStatus minlen_map_eval_p(const struct MinlenMap *map, double k, double *out);

/**
 * Ground state of `H_λ` on `n` interior nodes (refined twice), with
 * variances.
 *
 * # Safety
 * `map` must be a live handle and `out` valid for writes.
 */
enum MinlenStatus minlen_solve(const struct MinlenMap *map,
                               double lambda,
                               size_t n,
                               double tol,
                               struct MinlenSolution *out);

/**
 * Optimal trade-off curve at `count` Chebyshev-spaced λ in
 * `[lambda_min, 1]`. Writes `count` points into `points` when `capacity`
 * suffices; `*written` always receives `count`.
 *
 * # Safety
 * `map` must be a live handle, `written` valid for writes and `points`
 * valid for `capacity` writes.
 */
enum MinlenStatus minlen_tradeoff(const struct MinlenMap *map,
                                  size_t count,
                                  double lambda_min,
                                  struct MinlenTradeoffPoint *points,
                                  size_t capacity,
                                  size_t *written);

/**
 * Smallest position variance `π²/(4k_max²)`; `MINLEN_STATUS_UNBOUNDED`
 * without a cut-off.
 *
 * # Safety
 * `map` must be a live handle and `out` valid for writes.
 */
enum MinlenStatus minlen_minimal_length_variance(const struct MinlenMap *map, double *out);

/**
 * Minimal position min-entropy `-log(k_max/π)` in nats;
 * `MINLEN_STATUS_UNBOUNDED` without a cut-off.
 *
 * # Safety
 * `map` must be a live handle and `out` valid for writes.
 */
enum MinlenStatus minlen_min_entropy_minlength(const struct MinlenMap *map, double *out);

/**
 * Momentum entropy of `∝ cos(√β k)^γ`, in nats.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MinlenStatus minlen_cos_power_hk(double beta, double gamma, double *out);

/**
 * Message for the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *minlen_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *minlen_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINLEN_H */
