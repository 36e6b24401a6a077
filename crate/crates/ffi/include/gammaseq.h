/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef GAMMASEQ_H
#define GAMMASEQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a schema violation.
   */
  GS_STATUS_PARSE = 3,
  /**
   * Well-formed input outside the supported domain.
   */
  GS_STATUS_INVALID_INPUT = 4,
  /**
   * A size guard (dense limit, site or factor cap) was hit.
   */
  GS_STATUS_RESOURCE = 5,
  /**
   * The eigensolver failed or did not converge.
   */
  GS_STATUS_NUMERICAL = 6,
  GS_STATUS_IO = 7,
  GS_STATUS_PANIC = 8,
} GsStatus;

/**
 * Selects the norm engine in [`gs_quantize_norm`].
 */
typedef enum {
  GS_ENGINE_AUTO = 0,
  GS_ENGINE_DENSE = 1,
  GS_ENGINE_IMPLICIT = 2,
} GsEngine;

/**
 * Opaque γ-polynomial.
 */
typedef struct GsPolynomial GsPolynomial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next call into this library from the same thread.
 */
const char *gs_last_error(void);

/**
 * Parses a polynomial in the JSON schema. Word factors may be general tensors.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
GsStatus gs_polynomial_from_json(const char *json, GsPolynomial **out);

/**
 * # Safety
 * `p` must come from this library and not be freed twice. NULL is ignored.
 */
void gs_polynomial_free(GsPolynomial *p);

/**
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
GsStatus gs_polynomial_to_json(const GsPolynomial *p, char **out);

/**
 * # Safety
 * `s` must come from this library. NULL is ignored.
 */
void gs_string_free(char *s);

/**
 * The commutative product `a·b`.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` a valid pointer.
 */
GsStatus gs_polynomial_mul(const GsPolynomial *a, const GsPolynomial *b, GsPolynomial **out);

/**
 * The Poisson bracket `{a, b}` for site dimension `kappa`.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` a valid pointer.
 */
GsStatus gs_polynomial_bracket(const GsPolynomial *a,
                               const GsPolynomial *b,
                               uint32_t kappa,
                               GsPolynomial **out);

/**
 * `‖Q_N(p)‖` on `sites` sites.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
GsStatus gs_quantize_norm(const GsPolynomial *p,
                          uint32_t kappa,
                          uint32_t sites,
                          GsEngine engine,
                          uint64_t seed,
                          double *out);

/**
 * Canonical components of a tensor given as JSON, returned as JSON.
 *
 * # Safety
 * `tensor_json` must be a NUL-terminated string and `out` a valid pointer.
 */
GsStatus gs_decompose_json(const char *tensor_json, char **out);

/**
 * Runs an experiment config (or suite), writing any configured artifacts.
 * The report is returned as JSON and `exit_code` is 0 iff every assertion held.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report_out` and `exit_code`
 * valid pointers.
 */
GsStatus gs_run_config_json(const char *config_json, char **report_out, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAMMASEQ_H */
