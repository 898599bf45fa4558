#ifndef SEMILAB_H
#define SEMILAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SemilabStatus {
  SEMILAB_STATUS_OK = 0,
  SEMILAB_STATUS_NULL_POINTER = 1,
  SEMILAB_STATUS_INVALID_UTF8 = 2,
  // Malformed configuration, unknown experiment or unsupported request.
  SEMILAB_STATUS_CONFIG = 3,
  // Argument outside the domain of the routine.
  SEMILAB_STATUS_DOMAIN = 4,
  // Accuracy, range or degeneracy failure inside a computation.
  SEMILAB_STATUS_NUMERIC = 5,
  SEMILAB_STATUS_IO = 6,
  SEMILAB_STATUS_BUFFER_TOO_SMALL = 7,
  SEMILAB_STATUS_PANIC = 8,
} SemilabStatus;

typedef enum SemilabVerdict {
  SEMILAB_VERDICT_PASS = 0,
  SEMILAB_VERDICT_FAIL = 1,
  SEMILAB_VERDICT_EXPLORATORY = 2,
} SemilabVerdict;

// Precomputed M/M/∞ transition kernel.
typedef struct SemilabMmKernel SemilabMmKernel;

// Output of one experiment run.
typedef struct SemilabResult SemilabResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *semilab_version(void);

// Message of the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *semilab_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void semilab_string_free(char *s);

// `Δ log π_θ(n)`.
//
// # Safety
// `out` must be valid for writes.
enum SemilabStatus semilab_poisson_delta_log(double theta, uint64_t n, double *out);

// `Ψ_s(n)` and the `k` attaining the supremum.
//
// # Safety
// `out_psi` must be valid for writes; `out_argmax` may be null.
enum SemilabStatus semilab_psi_s(double s, uint64_t n, double *out_psi, uint64_t *out_argmax);

// `∫₀ᵗ (sinh(a(t−s))/sinh(at))² ds`.
//
// # Safety
// `out` must be valid for writes.
enum SemilabStatus semilab_alpha_integral(double a, double t, double *out);

// `∂²_x ln G_t(x, y)` for the Laguerre kernel with `α = 3/2`.
//
// # Safety
// `out` must be valid for writes.
enum SemilabStatus semilab_log_hess_32(double t, double x, double y, double *out);

// Child seed derived from `root` and `n_labels` UTF-8 labels.
//
// # Safety
// `labels` must point to `n_labels` nul-terminated strings; `out` must
// be valid for writes.
enum SemilabStatus semilab_seed_derive(uint64_t root,
                                       const char *const *labels,
                                       size_t n_labels,
                                       uint64_t *out);

// Kernel of the M/M/∞ queue with `ρ = λ/μ`, `μ = 1`, at time `t`, for
// starting states `0..=n_max` and targets `0..=k_max`.
//
// # Safety
// `out` must be valid for writes.
enum SemilabStatus semilab_mm_kernel_new(double rho,
                                         double t,
                                         uint64_t n_max,
                                         uint64_t k_max,
                                         struct SemilabMmKernel **out);

// Largest starting state of the kernel, or 0 for a null handle.
//
// # Safety
// `kernel` must be null or a live handle.
uint64_t semilab_mm_kernel_n_max(const struct SemilabMmKernel *kernel);

// `ln P_t f(n)` for `n = 0..=n_max`, where `f` is given by its
// `f_len` values on `0..f_len` and vanishes beyond. `out_len` must be at
// least `n_max + 1`.
//
// # Safety
// `kernel` must be a live handle, `f` valid for `f_len` reads and `out`
// valid for `out_len` writes.
enum SemilabStatus semilab_mm_kernel_ln_apply(const struct SemilabMmKernel *kernel,
                                              const double *f,
                                              size_t f_len,
                                              double *out,
                                              size_t out_len);

// # Safety
// `kernel` must come from [`semilab_mm_kernel_new`] and not have been freed.
void semilab_mm_kernel_free(struct SemilabMmKernel *kernel);

// Runs the experiment described by a JSON configuration. Nothing is
// written to disk.
//
// # Safety
// `config_json` must be a nul-terminated string and `out` valid for writes.
enum SemilabStatus semilab_experiment_run(const char *config_json, struct SemilabResult **out);

// # Safety
// `result` must be a live handle and `out` valid for writes.
enum SemilabStatus semilab_result_verdict(const struct SemilabResult *result,
                                          enum SemilabVerdict *out);

// # Safety
// `result` must be a live handle and `out` valid for writes.
enum SemilabStatus semilab_result_rows(const struct SemilabResult *result, size_t *out);

// Result table as CSV. Free the string with [`semilab_string_free`].
//
// # Safety
// `result` must be a live handle and `out` valid for writes.
enum SemilabStatus semilab_result_csv(const struct SemilabResult *result, char **out);

// Run metadata as JSON. Free the string with [`semilab_string_free`].
//
// # Safety
// `result` must be a live handle and `out` valid for writes.
enum SemilabStatus semilab_result_metadata_json(const struct SemilabResult *result, char **out);

// # Safety
// `result` must come from [`semilab_experiment_run`] and not have been freed.
void semilab_result_free(struct SemilabResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMILAB_H */
