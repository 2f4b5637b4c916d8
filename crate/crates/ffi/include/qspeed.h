#ifndef QSPEED_H
#define QSPEED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Sign of Im η; `QS_ETA_MINUS` is the default.
 */
typedef enum QsEta {
  QS_ETA_MINUS = 0,
  QS_ETA_PLUS = 1,
} QsEta;

typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_PARAMS = 2,
  QS_STATUS_DEGENERATE_ROOTS = 3,
  QS_STATUS_QUADRATURE_NOT_CONVERGED = 4,
  QS_STATUS_STEP_TOO_COARSE = 5,
  QS_STATUS_AMPLITUDE_NODE = 6,
  QS_STATUS_ZERO_EVOLUTION = 7,
  QS_STATUS_INDEX_OUT_OF_RANGE = 8,
  QS_STATUS_INVALID_GRID = 9,
  QS_STATUS_OTHER = 10,
  QS_STATUS_PANIC = 11,
} QsStatus;

/**
 * Opaque amplitude trace.
 */
typedef struct QsTrace QsTrace;

/**
 * Physical parameters in SI units (rad/s, s).
 */
typedef struct QsPhysicalParams {
  double omega0;
  double omega_l;
  double drive;
  double gamma;
  double lambda;
  double beta;
  double tau0;
  double horizon;
} QsPhysicalParams;

typedef struct QsComplex {
  double re;
  double im;
} QsComplex;

typedef struct QsSample {
  double t;
  struct QsComplex c1;
  struct QsComplex c1dot;
  double pop;
  double popdot;
} QsSample;

typedef struct QsMetrics {
  double tau;
  double tau_qsl;
  double n_blp;
  double pop_tau;
  double identity_residual;
} QsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *qs_last_error(void);

/**
 * Default parameters: ω₀ = ω_L = 5.1e9, γ = λ = 10, a 0.23 m cavity, no
 * drive, at rest, τ = 1.
 */
struct QsPhysicalParams qs_params_default(void);

/**
 * Computes the amplitude trace over [0, horizon] starting from `samples`
 * points (refined automatically). On success `*out` owns a new handle.
 *
 * # Safety
 * `params` must point to a valid struct and `out` to writable storage.
 */
enum QsStatus qs_trace_new(const struct QsPhysicalParams *params,
                           enum QsEta eta,
                           size_t samples,
                           struct QsTrace **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `trace` must come from [`qs_trace_new`] and not be used afterwards.
 */
void qs_trace_free(struct QsTrace *trace);

/**
 * Number of samples, 0 for null.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t qs_trace_len(const struct QsTrace *trace);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum QsStatus qs_trace_sample(const struct QsTrace *trace, size_t index, struct QsSample *out);

/**
 * τ_qsl, N and the identity residual of the trace.
 *
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum QsStatus qs_trace_metrics(const struct QsTrace *trace, struct QsMetrics *out);

/**
 * Time-local decay rate Γ(t) and Lamb shift S(t) at a sample.
 *
 * # Safety
 * `trace` must be a live handle; `gamma` and `shift` writable.
 */
enum QsStatus qs_trace_decay_and_shift(const struct QsTrace *trace,
                                       size_t index,
                                       double *gamma,
                                       double *shift);

/**
 * Stationary closed-form kernel F(t, t₁); `full != 0` keeps the
 * exp(±2μβt₁) factors.
 *
 * # Safety
 * `params` must be valid and `out` writable.
 */
enum QsStatus qs_kernel_closed(const struct QsPhysicalParams *params,
                               enum QsEta eta,
                               int32_t full,
                               double t,
                               double t1,
                               struct QsComplex *out);

/**
 * Kernel by numerical quadrature of the frequency integral over [0, ∞).
 * `error` may be null.
 *
 * # Safety
 * `params` must be valid, `out` writable, `error` null or writable.
 */
enum QsStatus qs_kernel_quadrature(const struct QsPhysicalParams *params,
                                   double t,
                                   double t1,
                                   struct QsComplex *out,
                                   double *error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSPEED_H */
