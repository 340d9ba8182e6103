#ifndef SLDLAB_H
#define SLDLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SldlabStatus {
  SLDLAB_STATUS_OK = 0,
  SLDLAB_STATUS_NULL_POINTER = 1,
  SLDLAB_STATUS_INVALID_ARGUMENT = 2,
  SLDLAB_STATUS_DIMENSION_EXCEEDED = 3,
  // Matrix is not Hermitian, unit-trace and positive semidefinite.
  SLDLAB_STATUS_NOT_PHYSICAL = 4,
  // The defining equation of an operator has no consistent solution.
  SLDLAB_STATUS_INCONSISTENT = 5,
  // The model carries no information about the parameter.
  SLDLAB_STATUS_DEGENERATE = 6,
  SLDLAB_STATUS_UNSUPPORTED = 7,
  SLDLAB_STATUS_INFEASIBLE = 8,
  // Numerical failure or a caught panic.
  SLDLAB_STATUS_INTERNAL = 9,
  // Output buffer shorter than required; the message states the needed length.
  SLDLAB_STATUS_BUFFER_TOO_SMALL = 10,
} SldlabStatus;

typedef enum SldlabGeneratorKind {
  // ½ Σ_j σ₃⁽ʲ⁾
  SLDLAB_GENERATOR_KIND_NON_ENTANGLING = 0,
  // ½ σ₃^{⊗N}
  SLDLAB_GENERATOR_KIND_ENTANGLING = 1,
} SldlabGeneratorKind;

// Projective readout handle.
typedef struct SldlabBasis SldlabBasis;

// Generator handle.
typedef struct SldlabGenerator SldlabGenerator;

// Density matrix handle.
typedef struct SldlabState SldlabState;

typedef struct SldlabFisher {
  double classical;
  double quantum;
  // 1 when the readout saturates the quantum bound.
  uint8_t saturated;
  double im_condition_max;
  double diagonal_residual;
  // 1/√(ν F_classical); +∞ when F_classical = 0.
  double bound;
} SldlabFisher;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *sldlab_version(void);

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into the library on this thread.
const char *sldlab_last_error(void);

// Caps the number of qubits any object may have (default 10).
enum SldlabStatus sldlab_set_max_qubits(size_t cap);

// Density matrix from row-major real and imaginary parts of length dim².
// `imag` may be null for a real matrix.
//
// # Safety
// `real` (and `imag` if non-null) must point to dim² doubles; `out` must be writable.
enum SldlabStatus sldlab_state_from_matrix(size_t dim,
                                           const double *real,
                                           const double *imag,
                                           struct SldlabState **out);

// ½(𝟙 + sign·σ₂)^{⊗n}, sign = ±1.
//
// # Safety
// `out` must be writable.
enum SldlabStatus sldlab_state_optimal_product(size_t n_qubits,
                                               int32_t sign,
                                               struct SldlabState **out);

// (|0…0⟩ + sign·|1…1⟩)/√2, sign = ±1.
//
// # Safety
// `out` must be writable.
enum SldlabStatus sldlab_state_cat(size_t n_qubits, int32_t sign, struct SldlabState **out);

// Number of qubits of a state.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum SldlabStatus sldlab_state_n_qubits(const struct SldlabState *state, size_t *out);

// Copies the dim² row-major entries into `real` and `imag`.
//
// # Safety
// `state` must be a live handle; `real` and `imag` must hold `len` doubles.
enum SldlabStatus sldlab_state_matrix(const struct SldlabState *state,
                                      double *real,
                                      double *imag,
                                      size_t len);

// ρ(x) = e^{−ixH} ρ e^{ixH} as a new handle.
//
// # Safety
// `state` and `generator` must be live handles; `out` must be writable.
enum SldlabStatus sldlab_state_evolve(const struct SldlabState *state,
                                      const struct SldlabGenerator *generator,
                                      double x,
                                      struct SldlabState **out);

// # Safety
// `state` must be null or a handle not yet freed.
void sldlab_state_free(struct SldlabState *state);

// # Safety
// `out` must be writable.
enum SldlabStatus sldlab_generator_new(enum SldlabGeneratorKind kind,
                                       size_t n_qubits,
                                       struct SldlabGenerator **out);

// # Safety
// `generator` must be null or a handle not yet freed.
void sldlab_generator_free(struct SldlabGenerator *generator);

// Product σ₁-eigenbasis readout, outcomes ordered ++…, …, −−….
//
// # Safety
// `out` must be writable.
enum SldlabStatus sldlab_basis_product_pm(size_t n_qubits, struct SldlabBasis **out);

// # Safety
// `basis` must be null or a handle not yet freed.
void sldlab_basis_free(struct SldlabBasis *basis);

// Fisher information and saturation of `state` under `generator`, read out
// in `basis`, with `repetitions` shots for the bound.
//
// # Safety
// All handles must be live; `out` must be writable.
enum SldlabStatus sldlab_fisher(const struct SldlabState *state,
                                const struct SldlabGenerator *generator,
                                const struct SldlabBasis *basis,
                                uint64_t repetitions,
                                struct SldlabFisher *out);

// Analytic optimal state for `kind` and `n_qubits`, with its real 1/λ per
// outcome written to `inv_lambdas` (length 2ⁿ) and ⟨L²⟩ to `qfi`.
//
// # Safety
// `inv_lambdas` must hold `len` doubles; `out_state` and `qfi` must be writable.
enum SldlabStatus sldlab_closed_form(enum SldlabGeneratorKind kind,
                                     size_t n_qubits,
                                     struct SldlabState **out_state,
                                     double *inv_lambdas,
                                     size_t len,
                                     double *qfi);

// Runs the verification suite; counts are written to `passed` and `failed`
// (checks that could not run count as failed).
//
// # Safety
// `passed` and `failed` must be writable.
enum SldlabStatus sldlab_verify(size_t *passed, size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLDLAB_H */
