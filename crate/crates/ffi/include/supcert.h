#ifndef SUPCERT_H
#define SUPCERT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; values match the CLI exit codes where they overlap.
 */
typedef enum {
  SUPCERT_STATUS_OK = 0,
  /**
   * Parse, data or I/O error.
   */
  SUPCERT_STATUS_DATA = 1,
  /**
   * A certification hypothesis failed.
   */
  SUPCERT_STATUS_HYPOTHESIS = 2,
  SUPCERT_STATUS_NULL_POINTER = 5,
  SUPCERT_STATUS_INVALID_UTF8 = 6,
  SUPCERT_STATUS_INVALID_ARGUMENT = 7,
  SUPCERT_STATUS_OUT_OF_RANGE = 8,
  SUPCERT_STATUS_PANIC = 9,
} SupcertStatus;

typedef enum {
  SUPCERT_DIRECTION_X = 0,
  SUPCERT_DIRECTION_EPS = 1,
} SupcertDirection;

/**
 * Opaque witness certificate.
 */
typedef struct SupcertCertificate SupcertCertificate;

/**
 * Opaque growth profile.
 */
typedef struct SupcertProfile SupcertProfile;

/**
 * Opaque prepared sum.
 */
typedef struct SupcertSum SupcertSum;

/**
 * Knobs for certification; see `supcert_options_default`.
 */
typedef struct {
  uint32_t trials;
  uint32_t budget;
  uint64_t seed;
} SupcertOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. Owned by the library.
 */
const char *supcert_last_error(void);

SupcertOptions supcert_options_default(void);

/**
 * Parses sum-file text; table paths resolve against `base_dir` (may be NULL for the working directory).
 *
 * # Safety
 * `text` and a non-NULL `base_dir` must be NUL-terminated strings; `out` must be writable.
 */
SupcertStatus supcert_sum_parse(const char *text,
                                const char *base_dir,
                                SupcertSum **out);

/**
 * # Safety
 * `sum` must come from `supcert_sum_parse` and not be freed twice.
 */
void supcert_sum_free(SupcertSum *sum);

/**
 * Evaluates `|h(y)|`.
 *
 * # Safety
 * `sum` must be a live handle and `out` writable.
 */
SupcertStatus supcert_sum_abs(const SupcertSum *sum, double y, double *out);

/**
 * Builds the witness certificate; `opts` may be NULL for defaults.
 *
 * # Safety
 * `sum` must be a live handle, `opts` NULL or readable, `out` writable.
 */
SupcertStatus supcert_certify(const SupcertSum *sum,
                              const SupcertOptions *opts,
                              SupcertCertificate **out);

/**
 * # Safety
 * `cert` must come from `supcert_certify` and not be freed twice.
 */
void supcert_certificate_free(SupcertCertificate *cert);

/**
 * Score `max` over the witness entries; NaN for a NULL handle.
 *
 * # Safety
 * `cert` must be NULL or a live handle.
 */
double supcert_certificate_score(const SupcertCertificate *cert);

/**
 * Two-sided constant; NaN for a NULL handle.
 *
 * # Safety
 * `cert` must be NULL or a live handle.
 */
double supcert_certificate_c_total(const SupcertCertificate *cert);

/**
 * # Safety
 * `cert` must be NULL or a live handle.
 */
size_t supcert_certificate_witness_count(const SupcertCertificate *cert);

/**
 * Witness `index`: its point and `|h|` there.
 *
 * # Safety
 * `cert` must be a live handle; `y` and `h_abs` writable.
 */
SupcertStatus supcert_certificate_witness(const SupcertCertificate *cert,
                                          size_t index,
                                          double *y,
                                          double *h_abs);

/**
 * JSON form of the certificate; release with `supcert_string_free`.
 *
 * # Safety
 * `cert` must be a live handle and `out` writable.
 */
SupcertStatus supcert_certificate_json(const SupcertCertificate *cert, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void supcert_string_free(char *s);

/**
 * Brute-force `sup |h|` over `(lo, hi)` with `budget` grid points.
 *
 * # Safety
 * `sum` must be a live handle; `sup` and `argmax` writable.
 */
SupcertStatus supcert_oracle_sup(const SupcertSum *sum,
                                 double lo,
                                 double hi,
                                 uint32_t budget,
                                 double *sup,
                                 double *argmax);

/**
 * Fits `c x^r (log x)^l` (or `c eps^r |log eps|^l`) to `n` samples.
 *
 * # Safety
 * `x` and `v` must point to `n` readable doubles; `out` writable.
 */
SupcertStatus supcert_fit_growth(const double *x,
                                 const double *v,
                                 size_t n,
                                 SupcertDirection direction,
                                 uint32_t max_l,
                                 SupcertProfile **out);

/**
 * # Safety
 * `p` must come from `supcert_fit_growth` and not be freed twice.
 */
void supcert_profile_free(SupcertProfile *p);

/**
 * Exponent and log power. `num`/`den` receive the exact exponent when one was
 * found (otherwise `den` is 0); `r` always receives the float value.
 *
 * # Safety
 * `p` must be a live handle; all out-pointers writable.
 */
SupcertStatus supcert_profile_exponent(const SupcertProfile *p,
                                       double *r,
                                       int64_t *num,
                                       int64_t *den,
                                       uint32_t *l);

/**
 * Constant band `[lo, hi]`.
 *
 * # Safety
 * `p` must be a live handle; `lo` and `hi` writable.
 */
SupcertStatus supcert_profile_band(const SupcertProfile *p, double *lo, double *hi);

/**
 * 1 when the samples do not follow any `c x^r (log x)^l` model, 0 otherwise (also for NULL).
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
int32_t supcert_profile_non_power_log(const SupcertProfile *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPCERT_H */
