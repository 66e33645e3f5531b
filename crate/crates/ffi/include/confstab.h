#ifndef CONFSTAB_H
#define CONFSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  /**
   * The check ran and found a violation or could not certify the claim.
   */
  CS_STATUS_VIOLATION = 1,
  CS_STATUS_NULL_POINTER = 2,
  CS_STATUS_NOT_PRIME = 3,
  CS_STATUS_DOMAIN = 4,
  CS_STATUS_OVERFLOW = 5,
  CS_STATUS_PARSE = 6,
  CS_STATUS_INVALID_UTF8 = 7,
  CS_STATUS_PANIC = 8,
  CS_STATUS_INTERNAL = 9,
} CsStatus;

typedef enum CsVerdict {
  CS_VERDICT_VANISHES = 0,
  CS_VERDICT_NORMAL_FORM = 1,
  CS_VERDICT_UNKNOWN = 2,
} CsVerdict;

/**
 * Opaque handle: the generator family for a prime and ambient dimension.
 */
typedef struct CsAlgebra CsAlgebra;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library; valid until the next call.
 */
const char *cs_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void cs_string_free(char *s);

/**
 * Creates the generator family for `(p, n)`: the plane for `n = 2`, the
 * higher-dimensional family for `p = 2, n > 2`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CsStatus cs_algebra_new(uint64_t p, uint32_t n, struct CsAlgebra **out);

/**
 * # Safety
 * `h` must come from [`cs_algebra_new`] and not have been freed. Null is ignored.
 */
void cs_algebra_free(struct CsAlgebra *h);

/**
 * Dimension of the basis in bidegree `(i, k)`.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum CsStatus cs_dim(const struct CsAlgebra *h, uint32_t i, uint32_t k, uint64_t *out);

/**
 * Dimension of the order-m cone homology in bidegree `(i, k)`.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum CsStatus cs_cone_dim(const struct CsAlgebra *h,
                          uint32_t m,
                          uint32_t i,
                          uint32_t k,
                          uint64_t *out);

/**
 * Dimension table for `0 ≤ i ≤ max_deg`, `0 ≤ k ≤ max_par` as JSON.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum CsStatus cs_dim_table_json(const struct CsAlgebra *h,
                                uint32_t max_deg,
                                uint32_t max_par,
                                char **out);

/**
 * The range constant `D(p, m, k)` as a reduced fraction.
 *
 * # Safety
 * `num` and `den` must be valid for writes.
 */
enum CsStatus cs_d_constant(uint64_t p, uint32_t m, int64_t k, int64_t *num, int64_t *den);

/**
 * Checks the order-m stable range for `k ≤ k_max`. Returns `Violation` when
 * the check fails; the JSON report is written either way.
 *
 * # Safety
 * `h` must be a live handle and `report` valid for writes.
 */
enum CsStatus cs_verify_iso_range(const struct CsAlgebra *h,
                                  uint32_t m,
                                  uint32_t k_max,
                                  char **report);

/**
 * Attempts to certify `[z, e] = 0` for a named class (`e`, `x2`, `z0`,
 * `w1`, `e^3`, ...). Writes the verdict and the JSONL proof trace.
 *
 * # Safety
 * `class` must be a NUL-terminated string; `verdict` and `trace` valid for writes.
 */
enum CsStatus cs_bracket_check(uint32_t n,
                               uint64_t p,
                               const char *class_,
                               enum CsVerdict *verdict,
                               char **trace);

/**
 * Checks that every non-ideal monomial in Dyer–Lashof words on `e` lies in
 * the order-m unstable range, for parity up to `max_par`.
 *
 * # Safety
 * `report` must be valid for writes.
 */
enum CsStatus cs_words_verify(uint32_t n, uint32_t m, uint32_t max_par, bool strict, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFSTAB_H */
