#ifndef GENALPHA_H
#define GENALPHA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * ρ∞ branch selector.
 */
typedef enum GaBranch {
  GA_BRANCH_MAIN = 0,
  GA_BRANCH_ALT1 = 1,
  GA_BRANCH_ALT2 = 2,
  GA_BRANCH_ALT3 = 3,
} GaBranch;

/**
 * Result code of every call.
 */
typedef enum GaStatus {
  GA_STATUS_OK = 0,
  GA_STATUS_NULL_POINTER = 1,
  GA_STATUS_INVALID_ARGUMENT = 2,
  GA_STATUS_UNSUPPORTED = 3,
  GA_STATUS_SINGULAR = 4,
  GA_STATUS_NO_CONVERGENCE = 5,
  GA_STATUS_NUMERICAL = 6,
  GA_STATUS_BUFFER_TOO_SMALL = 7,
  GA_STATUS_PANIC = 8,
} GaStatus;

/**
 * γ-rule selector.
 */
typedef enum GaVariant {
  GA_VARIANT_EQUAL_GAMMA = 0,
  GA_VARIANT_REMARK_ONE = 1,
} GaVariant;

/**
 * Opaque state of a scalar run `u' + λu = 0`.
 */
typedef struct GaScalarState GaScalarState;

/**
 * Opaque scheme handle.
 */
typedef struct GaScheme GaScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated name of a status code.
 */
const char *ga_status_name(enum GaStatus status);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len − 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ga_last_error_message(char *buf, size_t len);

/**
 * Scheme of order `p` at (α_m, α_f) under `variant`.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to free
 * with [`ga_scheme_free`].
 */
enum GaStatus ga_scheme_new(size_t p,
                            double alpha_m,
                            double alpha_f,
                            enum GaVariant variant,
                            struct GaScheme **out);

/**
 * EqualGamma scheme of order `p` with (α_m, α_f) from ρ∞ on `branch`.
 *
 * # Safety
 * As for [`ga_scheme_new`].
 */
enum GaStatus ga_scheme_from_rho(size_t p,
                                 double rho_inf,
                                 enum GaBranch branch,
                                 struct GaScheme **out);

/**
 * Releases a scheme; null is ignored.
 *
 * # Safety
 * `scheme` must come from this library and not be freed twice.
 */
void ga_scheme_free(struct GaScheme *scheme);

/**
 * Order p, α_m and α_f of a scheme. Any output pointer may be null.
 *
 * # Safety
 * `scheme` must be a live handle.
 */
enum GaStatus ga_scheme_info(const struct GaScheme *scheme,
                             size_t *p,
                             double *alpha_m,
                             double *alpha_f);

/**
 * Writes γ₁ … γ_{p−1} into `out` (capacity `len`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum GaStatus ga_scheme_gammas(const struct GaScheme *scheme, double *out, size_t len);

/**
 * Row-major G(T) for T = t_re + i·t_im, split into real and imaginary
 * parts; each buffer needs p·p entries.
 *
 * # Safety
 * `out_re` and `out_im` must point to `len` writable doubles.
 */
enum GaStatus ga_amplification_matrix(const struct GaScheme *scheme,
                                      double t_re,
                                      double t_im,
                                      double *out_re,
                                      double *out_im,
                                      size_t len);

/**
 * Worst-case spectral radius over the default real-axis samples and the
 * T → 0, ∞ limits; `stable` reports the full stability verdict.
 *
 * # Safety
 * `radius` must be valid; `stable` may be null.
 */
enum GaStatus ga_worst_case_radius(const struct GaScheme *scheme, double *radius, bool *stable);

/**
 * Table value C(p), 2 ≤ p ≤ 11.
 *
 * # Safety
 * `out` must be valid.
 */
enum GaStatus ga_c_of_p(size_t p, double *out);

/**
 * Closed-form unconditional-stability predicate of the third-order
 * EqualGamma scheme.
 */
bool ga_in_stability_region(double alpha_m, double alpha_f);

/**
 * Starts a scalar run of `u' + λu = 0` from `u0` with step `tau`. The scheme
 * is copied, so the scheme handle may be freed afterwards.
 *
 * # Safety
 * `scheme` must be live and `out` valid.
 */
enum GaStatus ga_scalar_state_new(const struct GaScheme *scheme,
                                  double lambda_re,
                                  double lambda_im,
                                  double u0_re,
                                  double u0_im,
                                  double tau,
                                  struct GaScalarState **out);

/**
 * Advances a scalar run by `n_steps`. On failure the state is unchanged.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum GaStatus ga_scalar_state_step(struct GaScalarState *state, uint64_t n_steps);

/**
 * Current U⁽⁰⁾ and time t = steps·τ. Any output pointer may be null.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum GaStatus ga_scalar_state_value(const struct GaScalarState *state,
                                    double *u_re,
                                    double *u_im,
                                    double *t);

/**
 * Releases a scalar state; null is ignored.
 *
 * # Safety
 * `state` must come from this library and not be freed twice.
 */
void ga_scalar_state_free(struct GaScalarState *state);

/**
 * Integrates `u' + λu = 0`, `u(0) = 1`, over round(t_end/τ) steps and writes
 * U⁽⁰⁾ at every step (t = 0 included). `written` receives the sample count;
 * when `capacity` is too small nothing is copied and `written` holds the
 * required size.
 *
 * # Safety
 * `out_re`/`out_im` must point to `capacity` doubles; `written` must be valid.
 */
enum GaStatus ga_integrate_scalar(const struct GaScheme *scheme,
                                  double lambda_re,
                                  double lambda_im,
                                  double tau,
                                  double t_end,
                                  double *out_re,
                                  double *out_im,
                                  size_t capacity,
                                  size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENALPHA_H */
