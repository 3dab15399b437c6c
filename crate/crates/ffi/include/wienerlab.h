#ifndef WIENERLAB_H
#define WIENERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_UTF8 = 2,
  WL_STATUS_PARSE = 3,
  WL_STATUS_DIMENSION = 4,
  WL_STATUS_DEGREE_CAP = 5,
  WL_STATUS_INVALID_ARGUMENT = 6,
  WL_STATUS_INTERNAL = 7,
  WL_STATUS_PANIC = 8,
} WlStatus;

// Opaque Clark reconstruction.
typedef struct WlClark WlClark;

// Opaque polynomial functional.
typedef struct WlPoly WlPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after success.
// The pointer stays valid until the next call on the same thread.
const char *wienerlab_last_error_message(void);

// Library version as a static string.
const char *wienerlab_version(void);

// Parses a scalar expression over `n` coordinates with the given degree cap.
//
// # Safety
// `text` must be a nul-terminated string and `out` a valid pointer.
enum WlStatus wienerlab_poly_parse(const char *text,
                                   uintptr_t n,
                                   uint32_t degree_cap,
                                   struct WlPoly **out);

// # Safety
// `p` must be null or a handle from this library not yet freed.
void wienerlab_poly_free(struct WlPoly *p);

// Canonical text form, one `coeff i:k ...` term per line.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum WlStatus wienerlab_poly_to_text(const struct WlPoly *p, char **out);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void wienerlab_string_free(char *s);

// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum WlStatus wienerlab_poly_expectation(const struct WlPoly *p, double *out);

// # Safety
// `p`, `q` must be live handles and `out` a valid pointer.
enum WlStatus wienerlab_poly_l2_inner(const struct WlPoly *p, const struct WlPoly *q, double *out);

// Product in the chaos algebra; the result is a new handle.
//
// # Safety
// `p`, `q` must be live handles and `out` a valid pointer.
enum WlStatus wienerlab_poly_product(const struct WlPoly *p,
                                     const struct WlPoly *q,
                                     struct WlPoly **out);

// Pointwise value at a sample of `len` increments.
//
// # Safety
// `sample` must point to `len` doubles; `p` must be live and `out` valid.
enum WlStatus wienerlab_poly_evaluate(const struct WlPoly *p,
                                      const double *sample,
                                      uintptr_t len,
                                      double *out);

// Clark reconstruction of a scalar functional.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum WlStatus wienerlab_clark_reconstruct(const struct WlPoly *p, struct WlClark **out);

// # Safety
// `c` must be a live handle and `out` a valid pointer.
enum WlStatus wienerlab_clark_residual(const struct WlClark *c, double *out);

// # Safety
// `c` must be a live handle and `out` a valid pointer.
enum WlStatus wienerlab_clark_to_json(const struct WlClark *c, char **out);

// # Safety
// `c` must be null or a handle from this library not yet freed.
void wienerlab_clark_free(struct WlClark *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIENERLAB_H */
