/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef WCTOP_H
#define WCTOP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WctStatus {
  WCT_STATUS_OK = 0,
  WCT_STATUS_NULL_POINTER = 1,
  WCT_STATUS_VALIDATION = 2,
  WCT_STATUS_DIMENSION_MISMATCH = 3,
  WCT_STATUS_NO_CONVERGENCE = 4,
  WCT_STATUS_NUMERIC = 5,
  WCT_STATUS_PANIC = 6,
} WctStatus;

// Conditional expectation onto the block-constant functions of a partition.
typedef struct WctCondExp WctCondExp;

// The operator f ↦ w·E(u·f).
typedef struct WctOperator WctOperator;

typedef struct WctComplex {
  double re;
  double im;
} WctComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer stays valid
// until the next failing call on the same thread.
const char *wct_last_error(void);

// Builds E from `n` atom masses and a block label per atom (labels 0..k-1, all used).
//
// # Safety
// `weights` and `labels` must point to `n` readable elements; `out` must be writable.
enum WctStatus wct_condexp_new(const double *weights,
                               const size_t *labels,
                               size_t n,
                               struct WctCondExp **out);

// # Safety
// `ce` must be null or a handle from [`wct_condexp_new`] that has not been freed.
void wct_condexp_free(struct WctCondExp *ce);

// # Safety
// `ce` must be a live handle.
size_t wct_condexp_dim(const struct WctCondExp *ce);

// Writes E(f) to `result`; both arrays hold `n` values.
//
// # Safety
// `ce` must be a live handle; `f` readable and `result` writable for `n` elements.
enum WctStatus wct_cond_exp(const struct WctCondExp *ce,
                            const struct WctComplex *f,
                            size_t n,
                            struct WctComplex *result);

// Builds M_w E M_u; `w` and `u` hold `n` values each, `n` the dimension of `ce`.
//
// # Safety
// `ce` must be a live handle; `w`, `u` readable for `n` elements; `out` writable.
enum WctStatus wct_operator_new(const struct WctCondExp *ce,
                                const struct WctComplex *w,
                                const struct WctComplex *u,
                                size_t n,
                                struct WctOperator **out);

// # Safety
// `op` must be null or a handle from [`wct_operator_new`] that has not been freed.
void wct_operator_free(struct WctOperator *op);

// # Safety
// `op` must be a live handle.
size_t wct_operator_dim(const struct WctOperator *op);

// Writes the n×n matrix of T in the orthonormal atom basis, row-major, into `result`
// (`len` must equal n·n).
//
// # Safety
// `op` must be a live handle; `result` writable for `len` elements.
enum WctStatus wct_operator_matrix(const struct WctOperator *op,
                                   struct WctComplex *result,
                                   size_t len);

// Operator norm of B_m = Σ (−1)^(m−k) C(m,k) T*^k T^k.
//
// # Safety
// `op` must be a live handle; `out` writable.
enum WctStatus wct_defect_norm(const struct WctOperator *op, uint32_t m, double *out);

// Operator norm of T* B_m T.
//
// # Safety
// `op` must be a live handle; `out` writable.
enum WctStatus wct_quasi_defect_norm(const struct WctOperator *op, uint32_t m, double *out);

// Whether ‖T*T − TT*‖ ≤ tol·max(1, ‖T‖²).
//
// # Safety
// `op` must be a live handle; `out` writable.
enum WctStatus wct_is_normal(const struct WctOperator *op, double tol, bool *out);

// Full classification report as a JSON string; release it with [`wct_string_free`].
//
// # Safety
// `op` must be a live handle; `out` writable.
enum WctStatus wct_classify_json(const struct WctOperator *op,
                                 uint32_t m_max,
                                 double rel_tol,
                                 char **out);

// # Safety
// `s` must be null or a string returned by this library that has not been freed.
void wct_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WCTOP_H */
