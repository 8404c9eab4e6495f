#ifndef LIPUNCERT_H
#define LIPUNCERT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Overall status of a chain or trial.
typedef enum {
  LU_CHAIN_STATUS_PASSED = 0,
  LU_CHAIN_STATUS_EMPIRICAL_NEGATIVE = 1,
  LU_CHAIN_STATUS_VIOLATION = 2,
} LuChainStatus;

// Instance family, passed as `uint32_t`.
typedef enum {
  LU_MODE_HILBERT = 0,
  LU_MODE_BANACH_LINEAR = 1,
  LU_MODE_BANACH_NONLINEAR = 2,
} LuMode;

// Result code of every fallible call.
typedef enum {
  LU_STATUS_OK = 0,
  LU_STATUS_NULL_POINTER = 1,
  LU_STATUS_INVALID_ARGUMENT = 2,
  LU_STATUS_INVALID_UTF8 = 3,
  LU_STATUS_PARSE_ERROR = 4,
  // A mathematical precondition failed (non-Hermitian matrix, non-unit state, domain escape, ...).
  LU_STATUS_DOMAIN_ERROR = 5,
  LU_STATUS_PANIC = 6,
} LuStatus;

// Opaque generated or parsed instance.
typedef struct LuInstance LuInstance;

// Opaque campaign report.
typedef struct LuReport LuReport;

// Terms of the chain `(nabla^2 + delta^2)/2 >= (nabla + delta)^2/4 >= nabla delta >= |f(ABx) - f(Ax) f(Bx)|`.
typedef struct {
  double nabla;
  double delta;
  double half_sum_squares;
  double quarter_square_sum;
  double product;
  // `|g(y)|` with `y = Bx - f(Bx) x`
  double middle_form;
  double final_bound;
  double min_slack;
  // 1 when `nabla` is computed exactly, 0 when it is a sampled lower bound.
  uint32_t nabla_exact;
  // An [`LuChainStatus`] value.
  uint32_t status;
} LuChainSummary;

typedef struct {
  uint64_t passed;
  uint64_t empirical_negative;
  uint64_t violations;
  uint64_t skipped;
} LuCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call into the library on this thread.
const char *lu_last_error(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and must not be freed twice.
void lu_string_free(char *s);

// `||v||_p`. `im` may be null for a real vector.
//
// # Safety
// `re` (and `im` when non-null) must point to `len` doubles; `out` must be writable.
LuStatus lu_norm(const double *re, const double *im, size_t len, double p, double *out);

// Norm of the functional `u -> sum u_i conj(w_i)` on `l_p`, i.e. `||w||_q` with `1/p + 1/q = 1`.
//
// # Safety
// As for [`lu_norm`].
LuStatus lu_dual_norm(const double *re, const double *im, size_t len, double p, double *out);

// `||Ah - <Ah,h>h||` for a Hermitian `dim x dim` matrix `A` and a unit vector `h`.
//
// # Safety
// `a_re`/`a_im` must point to `dim * dim` doubles, `h_re`/`h_im` to `dim`
// doubles (imaginary parts may be null); `out` must be writable.
LuStatus lu_delta_hilbert(const double *a_re,
                          const double *a_im,
                          const double *h_re,
                          const double *h_im,
                          size_t dim,
                          double *out);

// `nabla(<., h>, A, h)` by the dual formula, next to `||Ah - <Ah,h>h||`.
//
// # Safety
// As for [`lu_delta_hilbert`]; `nabla` and `delta` must be writable.
LuStatus lu_hilbert_reduction(const double *a_re,
                              const double *a_im,
                              const double *h_re,
                              const double *h_im,
                              size_t dim,
                              double *nabla,
                              double *delta);

// Seeded random instance. `mode` is an [`LuMode`] value; `p` is ignored in
// Hilbert mode. `cloud_size` is the number of sample points per domain (at least 2).
//
// # Safety
// `out` must be writable; on success it receives a handle to free with [`lu_instance_free`].
LuStatus lu_instance_generate(uint32_t mode_value,
                              size_t dim,
                              double p,
                              size_t cloud_size,
                              uint64_t seed,
                              LuInstance **out);

// Parses and validates an instance from JSON.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
LuStatus lu_instance_from_json(const char *json, LuInstance **out);

// Serializes an instance to JSON; free the result with [`lu_string_free`].
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
LuStatus lu_instance_to_json(const LuInstance *inst, char **out);

// Dimension of an instance, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t lu_instance_dim(const LuInstance *inst);

// Releases an instance. Null is ignored.
//
// # Safety
// `inst` must come from this library and must not be freed twice.
void lu_instance_free(LuInstance *inst);

// Evaluates the chain on an instance. Estimated Lipschitz norms use
// `refine_budget` refinement probes seeded by `seed`.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
LuStatus lu_chain_nhrs(const LuInstance *inst,
                       size_t refine_budget,
                       uint64_t seed,
                       LuChainSummary *out);

// Runs a seeded campaign. `p` is ignored in Hilbert mode; `workers == 0`
// uses every core. The report does not depend on `workers`.
//
// # Safety
// `out` must be writable; on success it receives a handle to free with [`lu_report_free`].
LuStatus lu_campaign_run(uint32_t mode_value,
                         uint64_t trials,
                         uint64_t seed,
                         size_t dim,
                         double p,
                         size_t refine_budget,
                         size_t workers,
                         LuReport **out);

// Trial counts of a report.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
LuStatus lu_report_counts(const LuReport *report, LuCounts *out);

// The report as JSON Lines (one line per trial, then a summary line);
// free the result with [`lu_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must be writable.
LuStatus lu_report_to_jsonl(const LuReport *report, char **out);

// Releases a report. Null is ignored.
//
// # Safety
// `report` must come from this library and must not be freed twice.
void lu_report_free(LuReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIPUNCERT_H */
