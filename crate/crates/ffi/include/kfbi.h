#ifndef KFBI_H
#define KFBI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by all entry points.
 */
typedef enum KfbiStatus {
  KFBI_STATUS_OK = 0,
  KFBI_STATUS_NULL_POINTER = 1,
  KFBI_STATUS_INVALID_UTF8 = 2,
  KFBI_STATUS_CONFIG = 3,
  KFBI_STATUS_INVALID_PROBLEM = 4,
  KFBI_STATUS_GEOMETRY = 5,
  KFBI_STATUS_NOT_CONVERGED = 6,
  KFBI_STATUS_SHAPE_MISMATCH = 7,
  KFBI_STATUS_IO = 8,
  KFBI_STATUS_BUFFER_TOO_SMALL = 9,
  KFBI_STATUS_PANIC = 10,
} KfbiStatus;

/**
 * A validated experiment configuration.
 */
typedef struct KfbiExperiment KfbiExperiment;

/**
 * Result of solving one grid level.
 */
typedef struct KfbiSolution KfbiSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a TOML experiment description.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KfbiStatus kfbi_experiment_from_toml(const char *toml, struct KfbiExperiment **out);

/**
 * Looks up a built-in preset by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KfbiStatus kfbi_experiment_from_preset(const char *name, struct KfbiExperiment **out);

/**
 * # Safety
 * `exp` must come from a `kfbi_experiment_from_*` call, or be null.
 */
void kfbi_experiment_free(struct KfbiExperiment *exp);

/**
 * Solves the experiment on an `n × n` grid with manufactured data.
 *
 * # Safety
 * `exp` must be a live handle and `out` a valid pointer.
 */
enum KfbiStatus kfbi_experiment_solve(const struct KfbiExperiment *exp,
                                      size_t n,
                                      struct KfbiSolution **out);

/**
 * # Safety
 * `sol` must come from [`kfbi_experiment_solve`], or be null.
 */
void kfbi_solution_free(struct KfbiSolution *sol);

/**
 * Node counts along the two parameter directions; values are stored
 * with the first direction fastest.
 *
 * # Safety
 * All pointers must be valid.
 */
enum KfbiStatus kfbi_solution_shape(const struct KfbiSolution *sol, size_t *nx, size_t *ny);

/**
 * Copies the computed nodal solution into `buf` (`nx·ny` doubles).
 *
 * # Safety
 * `sol` must be live and `buf` must hold `len` doubles.
 */
enum KfbiStatus kfbi_solution_values(const struct KfbiSolution *sol, double *buf, size_t len);

/**
 * Copies the exact solution sampled at the nodes into `buf`.
 *
 * # Safety
 * As [`kfbi_solution_values`].
 */
enum KfbiStatus kfbi_solution_exact(const struct KfbiSolution *sol, double *buf, size_t len);

/**
 * Max-norm error over the measured nodes, NaN for a null handle.
 *
 * # Safety
 * `sol` must be live or null.
 */
double kfbi_solution_max_error(const struct KfbiSolution *sol);

/**
 * # Safety
 * `sol` must be live or null.
 */
size_t kfbi_solution_gmres_iterations(const struct KfbiSolution *sol);

/**
 * # Safety
 * `sol` must be live or null.
 */
size_t kfbi_solution_interface_points(const struct KfbiSolution *sol);

/**
 * # Safety
 * `sol` must be live or null.
 */
double kfbi_solution_cpu_seconds(const struct KfbiSolution *sol);

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string, truncating if needed. Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must hold `len` bytes, or be null with `len == 0`.
 */
size_t kfbi_last_error_message(char *buf, size_t len);

/**
 * Static NUL-terminated name of a status code.
 */
const char *kfbi_status_name(enum KfbiStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KFBI_H */
