#ifndef ARDC_H
#define ARDC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `Ok` is zero; solver errors keep their own codes.
 */
typedef enum ArdcStatus {
  ARDC_STATUS_OK = 0,
  ARDC_STATUS_INVALID_PARAMETER = 1,
  ARDC_STATUS_OUT_OF_RANGE = 2,
  ARDC_STATUS_DOMAIN = 3,
  ARDC_STATUS_NON_FINITE = 4,
  ARDC_STATUS_DEGENERATE_DENOMINATOR = 5,
  ARDC_STATUS_DEGENERATE_MATCHING = 6,
  ARDC_STATUS_NOT_CONVERGED = 7,
  ARDC_STATUS_NUMERICAL_FAILURE = 8,
  ARDC_STATUS_STEP_UNDERFLOW = 9,
  ARDC_STATUS_ORACLE_REFUSAL = 10,
  ARDC_STATUS_NOT_APPLICABLE = 11,
  ARDC_STATUS_INVALID_BALL = 12,
  ARDC_STATUS_NULL_POINTER = 13,
  ARDC_STATUS_PANIC = 14,
} ArdcStatus;

/**
 * Built-in equations. `param` of `ardc_solve_builtin` is `lambda`, `nu`,
 * `m` or `omega` respectively and is ignored for Airy.
 */
typedef enum ArdcProblemKind {
  ARDC_PROBLEM_KIND_AIRY = 0,
  ARDC_PROBLEM_KIND_BREMER237 = 1,
  ARDC_PROBLEM_KIND_LEGENDRE = 2,
  ARDC_PROBLEM_KIND_BURST = 3,
  ARDC_PROBLEM_KIND_TONE = 4,
} ArdcProblemKind;

/**
 * Opaque solve result.
 */
typedef struct ArdcReport ArdcReport;

/**
 * Solver settings. Start from `ardc_options_default`.
 */
typedef struct ArdcOptions {
  double eps;
  double eps_h;
  size_t n_ricc;
  size_t n_spec;
  /**
   * Skip dense phase data; dense evaluation inside oscillatory steps then fails.
   */
  bool endpoint_only;
} ArdcOptions;

/**
 * Coefficient callback: returns `omega(t)` or `gamma(t)`. Nullable.
 */
typedef double (*ArdcCoeffFn)(double t, void *user_data);

typedef struct ArdcComplex {
  double re;
  double im;
} ArdcComplex;

typedef struct ArdcStats {
  uint64_t osc_attempted;
  uint64_t osc_accepted;
  uint64_t spectral_attempted;
  uint64_t spectral_accepted;
  /**
   * Scalar coefficient evaluations.
   */
  uint64_t n_f;
  /**
   * Least-squares solves.
   */
  uint64_t n_ls;
} ArdcStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library defaults: `eps = 1e-12`, `eps_h = 1e-13`, 16 nodes each.
 */
struct ArdcOptions ardc_options_default(void);

/**
 * Solves a built-in problem. A NaN `t0` or `t1` keeps the problem's own
 * interval; `opts` may be null for defaults.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage; `opts` must be null
 * or point to an `ArdcOptions`.
 */
enum ArdcStatus ardc_solve_builtin(enum ArdcProblemKind kind,
                                   double param,
                                   double t0,
                                   double t1,
                                   const struct ArdcOptions *opts,
                                   struct ArdcReport **out);

/**
 * Solves `u'' + 2 gamma u' + omega^2 u = 0` on `[t0, t1]` with callbacks.
 * `gamma` may be null (identically zero). Both callbacks receive
 * `user_data` and are called only from this thread during the call.
 * `h_init` is the width used to estimate `omega'` at `t0`.
 *
 * # Safety
 * `omega` must be a valid function pointer; `out` must be writable;
 * `opts` must be null or valid.
 */
enum ArdcStatus ardc_solve(ArdcCoeffFn omega,
                           ArdcCoeffFn gamma,
                           void *user_data,
                           double t0,
                           double t1,
                           struct ArdcComplex u0,
                           struct ArdcComplex du0,
                           double h_init,
                           const struct ArdcOptions *opts,
                           struct ArdcReport **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from a solve call and not have been freed.
 */
void ardc_report_free(struct ArdcReport *report);

/**
 * Number of solution points: `t0` and the end of every accepted step.
 * Zero for a null report.
 *
 * # Safety
 * `report` must be null or valid.
 */
size_t ardc_report_len(const struct ArdcReport *report);

/**
 * Solution point `index`. Any of the out-pointers may be null.
 *
 * # Safety
 * `report` must be valid; non-null out-pointers must be writable.
 */
enum ArdcStatus ardc_report_point(const struct ArdcReport *report,
                                  size_t index,
                                  double *t,
                                  struct ArdcComplex *u,
                                  struct ArdcComplex *du);

/**
 * Step counts and evaluation counts of the solve.
 *
 * # Safety
 * `report` must be valid and `stats` writable.
 */
enum ArdcStatus ardc_report_stats(const struct ArdcReport *report, struct ArdcStats *stats);

/**
 * Condition estimate `kappa`; NaN for a null report.
 *
 * # Safety
 * `report` must be null or valid.
 */
double ardc_report_kappa(const struct ArdcReport *report);

/**
 * Best attainable relative accuracy, `kappa * eps_mach`; NaN for a null report.
 *
 * # Safety
 * `report` must be null or valid.
 */
double ardc_report_eps_floor(const struct ArdcReport *report);

/**
 * `(u, u')` at any `t` inside the solved interval.
 *
 * # Safety
 * `report` must be valid; `u` and `du` must be writable.
 */
enum ArdcStatus ardc_report_eval(const struct ArdcReport *report,
                                 double t,
                                 struct ArdcComplex *u,
                                 struct ArdcComplex *du);

/**
 * Message for the last failing call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *ardc_last_error_message(void);

/**
 * Static name of a status code.
 */
const char *ardc_status_name(enum ArdcStatus status);

/**
 * Library version as a static string.
 */
const char *ardc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARDC_H */
