#ifndef EXPOCHAR_H
#define EXPOCHAR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum ExpocharStatus {
  EXPOCHAR_STATUS_OK = 0,
  EXPOCHAR_STATUS_NULL_POINTER = 1,
  EXPOCHAR_STATUS_INVALID_UTF8 = 2,
  EXPOCHAR_STATUS_PARAMETER_DOMAIN = 3,
  EXPOCHAR_STATUS_CONFIG = 4,
  EXPOCHAR_STATUS_NON_UNIQUE = 5,
  EXPOCHAR_STATUS_NUMERIC = 6,
  EXPOCHAR_STATUS_DEGENERATE_SAMPLE = 7,
  EXPOCHAR_STATUS_IO = 8,
  EXPOCHAR_STATUS_PANIC = 9,
} ExpocharStatus;

/**
 * Opaque distribution handle.
 */
typedef struct ExpocharDist ExpocharDist;

/**
 * Derived contraction constants.
 */
typedef struct ExpocharContractionParams {
  double p;
  double a;
  double b;
  double c;
  double a_ratio;
  double b_ratio;
  double v;
  uint32_t k;
  double gamma;
  double rho;
} ExpocharContractionParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *expochar_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *expochar_version(void);

/**
 * Creates a distribution from JSON such as
 * `{"family":"gamma","params":{"shape":2,"rate":1}}`.
 *
 * # Safety
 * `json` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum ExpocharStatus expochar_dist_from_json(const char *json, struct ExpocharDist **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `dist` must come from `expochar_dist_from_json` and not be used again.
 */
void expochar_dist_free(struct ExpocharDist *dist);

/**
 * Whether the handle is an exponential law (1) or not (0).
 *
 * # Safety
 * `dist` must be a live handle and `out` a valid pointer.
 */
enum ExpocharStatus expochar_dist_is_exponential(const struct ExpocharDist *dist, int32_t *out);

/**
 * Mean of the distribution.
 *
 * # Safety
 * `dist` must be a live handle and `out` a valid pointer.
 */
enum ExpocharStatus expochar_dist_mean(const struct ExpocharDist *dist, double *out);

/**
 * Laplace transform `E exp(-sX)` for `s >= 0`.
 *
 * # Safety
 * `dist` must be a live handle and `out` a valid pointer.
 */
enum ExpocharStatus expochar_dist_laplace(const struct ExpocharDist *dist, double s, double *out);

/**
 * Fills `buf[0..n]` with draws determined by `seed`.
 *
 * # Safety
 * `dist` must be a live handle and `buf` valid for `n` writes.
 */
enum ExpocharStatus expochar_dist_sample(const struct ExpocharDist *dist,
                                         uint64_t seed,
                                         double *buf,
                                         size_t n);

/**
 * Residual of one equation given as JSON, e.g. `{"equation":"diagonal","p":0.5}`.
 * `t` is used only by the bivariate independence equation.
 *
 * # Safety
 * `dist` must be a live handle, `equation` a nul-terminated string and
 * `out` a valid pointer.
 */
enum ExpocharStatus expochar_residual(const struct ExpocharDist *dist,
                                      const char *equation,
                                      double s,
                                      double t,
                                      double *out);

/**
 * Laplace-transform coefficients `c_0..=c_order` from the geometric
 * compound-sum recursion. `coeffs` must hold `order + 1` values.
 *
 * # Safety
 * `coeffs` must be valid for `len` writes.
 */
enum ExpocharStatus expochar_solve_geometric(double p,
                                             double q,
                                             double mean,
                                             size_t order,
                                             double *coeffs,
                                             size_t len);

/**
 * Coefficients of `1/f` from the regression recursion.
 *
 * # Safety
 * `coeffs` must be valid for `len` writes.
 */
enum ExpocharStatus expochar_solve_regression(double p,
                                              double mean,
                                              size_t order,
                                              double *coeffs,
                                              size_t len);

/**
 * Contraction constants for `(p, a, b)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ExpocharStatus expochar_contraction_params(double p,
                                                double a,
                                                double b,
                                                struct ExpocharContractionParams *out);

/**
 * Runs a command described by a config JSON (with a `command` field) and
 * returns the report text, as the command-line tool would print it.
 * `expected` receives 1 when the outcome matches the distribution family.
 *
 * # Safety
 * `config` must be a nul-terminated string; `out` and `expected` valid
 * pointers. Release `*out` with `expochar_string_free`.
 */
enum ExpocharStatus expochar_run(const char *config, char **out, int32_t *expected);

/**
 * Releases a string returned by the library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used again.
 */
void expochar_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPOCHAR_H */
