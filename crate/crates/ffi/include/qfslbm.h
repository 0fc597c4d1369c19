#ifndef QFSLBM_H
#define QFSLBM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QfsStatus {
  QFS_STATUS_OK = 0,
  QFS_STATUS_NULL_POINTER = 1,
  QFS_STATUS_INVALID_UTF8 = 2,
  QFS_STATUS_CONFIG = 3,
  QFS_STATUS_INVALID_INPUT = 4,
  QFS_STATUS_NUMERICAL = 5,
  QFS_STATUS_IO = 6,
  QFS_STATUS_BUFFER_TOO_SMALL = 7,
  QFS_STATUS_PANIC = 8,
} QfsStatus;

/**
 * Field selector for [`qfs_solver_copy_field`].
 */
typedef enum QfsField {
  QFS_FIELD_DENSITY = 0,
  QFS_FIELD_VELOCITY_X = 1,
  QFS_FIELD_VELOCITY_Y = 2,
  QFS_FIELD_VELOCITY_Z = 3,
  QFS_FIELD_TEMPERATURE = 4,
} QfsField;

/**
 * Terminal state of [`qfs_run`].
 */
typedef enum QfsRunStatus {
  QFS_RUN_STATUS_CONVERGED = 0,
  QFS_RUN_STATUS_COMPLETED = 1,
  QFS_RUN_STATUS_MAX_STEPS = 2,
  QFS_RUN_STATUS_DIVERGED = 3,
} QfsRunStatus;

/**
 * Validated run configuration.
 */
typedef struct QfsConfig QfsConfig;

/**
 * Solver advanced one step at a time.
 */
typedef struct QfsSolver QfsSolver;

typedef struct QfsRunResult {
  enum QfsRunStatus status;
  uint64_t steps;
  /**
   * Last logged residual (NaN if none).
   */
  double final_residual;
  uint64_t quantum_executions;
} QfsRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` writable bytes.
 */
size_t qfs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qfs_version(void);

/**
 * Parses a flat `key = value` configuration.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum QfsStatus qfs_config_parse(const char *text, struct QfsConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from [`qfs_config_parse`] not yet freed.
 */
void qfs_config_free(struct QfsConfig *config);

/**
 * Builds a solver at step 0 from a configuration. The configuration stays
 * owned by the caller.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for a write.
 */
enum QfsStatus qfs_solver_new(const struct QfsConfig *config, struct QfsSolver **out);

/**
 * # Safety
 * `solver` must be null or a handle from [`qfs_solver_new`] not yet freed.
 */
void qfs_solver_free(struct QfsSolver *solver);

/**
 * Advances one time step. On success `residual` (if non-null) receives the
 * step residual. On a numerical failure the solver keeps its previous state.
 *
 * # Safety
 * `solver` must be a live handle; `residual` null or valid for a write.
 */
enum QfsStatus qfs_solver_step(struct QfsSolver *solver, double *residual);

/**
 * Steps taken so far (0 for a null handle).
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
uint64_t qfs_solver_steps(const struct QfsSolver *solver);

/**
 * Quantum circuits executed so far (0 for classical methods).
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
uint64_t qfs_solver_circuit_executions(const struct QfsSolver *solver);

/**
 * Writes the grid extents to `shape[0..3]` (1 for the unused z axis of 2D
 * grids) and returns the node count.
 *
 * # Safety
 * `solver` must be a live handle; `shape` null or valid for 3 writes.
 */
size_t qfs_solver_shape(const struct QfsSolver *solver, size_t *shape);

/**
 * Copies one field in node order (x fastest) into `buf`, which must hold
 * the node count.
 *
 * # Safety
 * `solver` must be a live handle; `buf` valid for `len` writes.
 */
enum QfsStatus qfs_solver_copy_field(const struct QfsSolver *solver,
                                     enum QfsField field,
                                     double *buf,
                                     size_t len);

/**
 * Runs a configuration to completion (without writing output files).
 *
 * # Safety
 * `config` must be a live handle; `result` valid for a write.
 */
enum QfsStatus qfs_run(const struct QfsConfig *config, struct QfsRunResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFSLBM_H */
