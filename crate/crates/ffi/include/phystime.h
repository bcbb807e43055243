#ifndef PHYSTIME_H
#define PHYSTIME_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_NULL_POINTER = 1,
  PT_STATUS_INVALID_INPUT = 2,
  PT_STATUS_CONFIG = 3,
  PT_STATUS_NUMERICAL = 4,
  PT_STATUS_BUFFER_SIZE = 5,
  PT_STATUS_PANIC = 6,
} PtStatus;

// Constraint solver selector for [`pt_subspace_solve`].
typedef enum PtSolveMethod {
  PT_SOLVE_METHOD_SPECTRAL_MATCHING = 0,
  PT_SOLVE_METHOD_KERNEL_EIGENDECOMPOSITION = 1,
} PtSolveMethod;

typedef struct PtClock PtClock;

typedef struct PtExtended PtExtended;

// The POVM keeps its own copy of the subspace so that coefficient vectors
// can be turned into physical states without a second handle.
typedef struct PtPovm PtPovm;

typedef struct PtSubspace PtSubspace;

typedef struct PtSystem PtSystem;

// Scalar audit figures of a time POVM.
typedef struct PtPovmDefects {
  double min_eigenvalue;
  double completeness_residual;
  double orthogonality_defect;
  double idempotency_defect;
} PtPovmDefects;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *pt_last_error(void);

// Library version as a static NUL-terminated string.
const char *pt_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string obtained from this library, freed once.
void pt_string_free(char *s);

// Uniform clock grid of `size` points, spacing `step`, first point
// `origin`. `sigma` must be +1 or -1.
//
// # Safety
// `out` must be valid for a pointer write.
enum PtStatus pt_clock_new(size_t size,
                           double step,
                           double origin,
                           int32_t sigma,
                           struct PtClock **out);

// # Safety
// `clock` must be null or a live handle.
void pt_clock_free(struct PtClock *clock);

// Number of grid points, 0 for a null handle.
//
// # Safety
// `clock` must be null or a live handle.
size_t pt_clock_size(const struct PtClock *clock);

// Copies the grid times into `out` (length must equal the clock size).
//
// # Safety
// `clock` must be a live handle and `out` valid for `len` writes.
enum PtStatus pt_clock_times(const struct PtClock *clock, double *out, size_t len);

// System space from an `n x n` Hermitian matrix given row-major. `im` may
// be null for a real matrix.
//
// # Safety
// `re` (and `im` if non-null) must be valid for `n * n` reads.
enum PtStatus pt_system_new(const double *re, const double *im, size_t n, struct PtSystem **out);

// # Safety
// `system` must be null or a live handle.
void pt_system_free(struct PtSystem *system);

// Number of levels, 0 for a null handle.
//
// # Safety
// `system` must be null or a live handle.
size_t pt_system_dim(const struct PtSystem *system);

// Copies the ascending energies into `out` (length must equal the dimension).
//
// # Safety
// `system` must be a live handle and `out` valid for `len` writes.
enum PtStatus pt_system_energies(const struct PtSystem *system, double *out, size_t len);

// Extended space of a system and a clock. Both inputs are copied; they may
// be freed afterwards.
//
// # Safety
// `system` and `clock` must be live handles, `out` valid for a pointer write.
enum PtStatus pt_extended_new(const struct PtSystem *system,
                              const struct PtClock *clock,
                              struct PtExtended **out);

// # Safety
// `ext` must be null or a live handle.
void pt_extended_free(struct PtExtended *ext);

// `levels * M`, 0 for a null handle.
//
// # Safety
// `ext` must be null or a live handle.
size_t pt_extended_dim(const struct PtExtended *ext);

// Solves the constraint. A non-positive or non-finite `tolerance` selects
// the default (half the clock frequency step).
//
// # Safety
// `ext` must be a live handle, `out` valid for a pointer write.
enum PtStatus pt_subspace_solve(const struct PtExtended *ext,
                                enum PtSolveMethod method,
                                double tolerance,
                                struct PtSubspace **out);

// # Safety
// `sub` must be null or a live handle.
void pt_subspace_free(struct PtSubspace *sub);

// Physical dimension `d`, 0 for a null handle.
//
// # Safety
// `sub` must be null or a live handle.
size_t pt_subspace_dim(const struct PtSubspace *sub);

// Number of system levels with no matching clock frequency.
//
// # Safety
// `sub` must be null or a live handle.
size_t pt_subspace_unmatched(const struct PtSubspace *sub);

// Time POVM on the physical subspace. Fails with `Numerical` when the
// subspace is empty.
//
// # Safety
// `sub` and `ext` must be live handles, `out` valid for a pointer write.
enum PtStatus pt_povm_new(const struct PtSubspace *sub,
                          const struct PtExtended *ext,
                          struct PtPovm **out);

// # Safety
// `povm` must be null or a live handle.
void pt_povm_free(struct PtPovm *povm);

// Number of effects (the clock size), 0 for a null handle.
//
// # Safety
// `povm` must be null or a live handle.
size_t pt_povm_len(const struct PtPovm *povm);

// Dimension `d` of each effect, 0 for a null handle.
//
// # Safety
// `povm` must be null or a live handle.
size_t pt_povm_dim(const struct PtPovm *povm);

// Copies effect `m` row-major into `re` and `im`, each of length `d * d`.
//
// # Safety
// `povm` must be a live handle, `re` and `im` valid for `len` writes.
enum PtStatus pt_povm_effect(const struct PtPovm *povm,
                             size_t m,
                             double *re,
                             double *im,
                             size_t len);

// Positivity, completeness and projection-valued-measure defects.
//
// # Safety
// `povm` must be a live handle, `out` valid for a write.
enum PtStatus pt_povm_defects(const struct PtPovm *povm, struct PtPovmDefects *out);

// Time distribution `p_m` of the physical state with coefficients
// `c_re + i c_im` (length `d`, normalised internally; `c_im` may be null).
// `out` must have the clock size.
//
// # Safety
// `povm` must be a live handle; the arrays must be valid for their lengths.
enum PtStatus pt_povm_distribution(const struct PtPovm *povm,
                                   const double *c_re,
                                   const double *c_im,
                                   size_t d,
                                   double *out,
                                   size_t len);

// Runs a scenario given as TOML text and writes its JSON report to
// `*out_json` (release with [`pt_string_free`]). `*passed` receives whether
// every check came out as expected. Scenario check failures are not an
// error status.
//
// # Safety
// `config` must be a NUL-terminated string; `out_json` and `passed` must be
// valid for writes.
enum PtStatus pt_scenario_run(const char *config, char **out_json, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHYSTIME_H */
