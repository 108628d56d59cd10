#ifndef PARAWAVE_H
#define PARAWAVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PwStatus {
  PW_STATUS_OK = 0,
  PW_STATUS_NULL_POINTER = 1,
  PW_STATUS_INVALID_ARGUMENT = 2,
  PW_STATUS_DOMAIN = 3,
  PW_STATUS_SHAPE_MISMATCH = 4,
  PW_STATUS_ALIASING = 5,
  PW_STATUS_INADMISSIBLE_LEVEL = 6,
  PW_STATUS_LEAKAGE = 7,
  PW_STATUS_PRECONDITION = 8,
  PW_STATUS_CERTIFICATION = 9,
  PW_STATUS_IO = 10,
  PW_STATUS_PANIC = 11,
} PwStatus;

typedef enum PwPreset {
  PW_PRESET_SINGLE_ATOM = 0,
  PW_PRESET_RANDOM = 1,
  PW_PRESET_TAYLOR_GREEN = 2,
} PwPreset;

typedef enum PwSolverStatus {
  PW_SOLVER_STATUS_CONVERGED = 0,
  PW_SOLVER_STATUS_NON_CONTRACTION = 1,
  PW_SOLVER_STATUS_CAP_REACHED = 2,
} PwSolverStatus;

// Wavelet coefficients with a flat entry table for indexed access.
typedef struct PwCoefficients PwCoefficients;

// A scalar field on a lattice.
typedef struct PwField PwField;

// A frequency lattice together with its wavelet basis.
typedef struct PwLattice PwLattice;

// The outcome of a Picard run.
typedef struct PwSolver PwSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error of this thread into `buf` (NUL-terminated, truncated to `len`).
// Returns the full message length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t pw_last_error_message(char *buf, size_t len);

// Creates a lattice of `size^dim` points (`dim` 2 or 3, `size` a power of two >= 16).
//
// # Safety
// `out` must point to a writable handle slot.
enum PwStatus pw_lattice_new(size_t dim, size_t size, struct PwLattice **out);

// # Safety
// `lattice` must be null or a live handle; it is invalid afterwards.
void pw_lattice_free(struct PwLattice *lattice);

// Finest atom level, or -1 for a null handle.
//
// # Safety
// `lattice` must be null or a live handle.
int32_t pw_lattice_max_level(const struct PwLattice *lattice);

// Number of grid points, or 0 for a null handle.
//
// # Safety
// `lattice` must be null or a live handle.
size_t pw_lattice_points(const struct PwLattice *lattice);

// Builds a real field from row-major point values at `x = p / size`.
//
// # Safety
// `samples` must point to `len` doubles; `out` to a writable handle slot.
enum PwStatus pw_field_from_samples(const struct PwLattice *lattice,
                                    const double *samples,
                                    size_t len,
                                    struct PwField **out);

// Writes the real part of the point values; `len` must equal the lattice point count.
//
// # Safety
// `field` must be a live handle; `out` must point to `len` writable doubles.
enum PwStatus pw_field_samples(const struct PwField *field, double *out, size_t len);

// L2 norm of the field over the unit torus, or NaN for a null handle.
//
// # Safety
// `field` must be null or a live handle.
double pw_field_norm(const struct PwField *field);

// # Safety
// `field` must be null or a live handle; it is invalid afterwards.
void pw_field_free(struct PwField *field);

// Wavelet coefficients of `field` on levels `0..=max_level`.
//
// # Safety
// Handles must be live; `out` must point to a writable handle slot.
enum PwStatus pw_analyze(const struct PwLattice *lattice,
                         const struct PwField *field,
                         struct PwCoefficients **out);

// Number of coefficients, or 0 for a null handle.
//
// # Safety
// `coefficients` must be null or a live handle.
size_t pw_coefficients_len(const struct PwCoefficients *coefficients);

// Entry `index`: band `eps` (0 is the scaling band), level `j`, translation `k` and value.
// `k` receives `dim` entries.
//
// # Safety
// `coefficients` must be live; every output pointer must be writable, `k` for `dim` entries.
enum PwStatus pw_coefficients_entry(const struct PwCoefficients *coefficients,
                                    size_t index,
                                    uint8_t *eps,
                                    uint32_t *j,
                                    size_t *k,
                                    double *re,
                                    double *im);

// # Safety
// `coefficients` must be null or a live handle; it is invalid afterwards.
void pw_coefficients_free(struct PwCoefficients *coefficients);

// Rebuilds the field from its coefficients.
//
// # Safety
// Handles must be live; `out` must point to a writable handle slot.
enum PwStatus pw_synthesize(const struct PwLattice *lattice,
                            const struct PwCoefficients *coefficients,
                            struct PwField **out);

// Runs the Picard iteration with default settings for preset data of critical norm `scale`.
//
// # Safety
// `lattice` must be live; `out` must point to a writable handle slot.
enum PwStatus pw_solve(const struct PwLattice *lattice,
                       enum PwPreset preset,
                       double scale,
                       uint64_t seed,
                       struct PwSolver **out);

// # Safety
// `solver` must be a live handle; `out` must be writable.
enum PwStatus pw_solver_status(const struct PwSolver *solver, enum PwSolverStatus *out);

// Copies up to `len` increment norms into `out`; returns how many iterations ran.
//
// # Safety
// `solver` must be null or live; `out` must be null or point to `len` writable doubles.
size_t pw_solver_increments(const struct PwSolver *solver, double *out, size_t len);

// Residual of the mild formulation at the final iterate, or NaN for a null handle.
//
// # Safety
// `solver` must be null or a live handle.
double pw_solver_residual(const struct PwSolver *solver);

// # Safety
// `solver` must be null or a live handle; it is invalid afterwards.
void pw_solver_free(struct PwSolver *solver);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARAWAVE_H */
