/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FODE_H
#define FODE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  FODE_STATUS_OK = 0,
  FODE_STATUS_NULL_POINTER = 1,
  FODE_STATUS_DOMAIN = 2,
  FODE_STATUS_CONFIG = 3,
  FODE_STATUS_INDEX = 4,
  FODE_STATUS_STEP = 5,
  FODE_STATUS_STRATEGY = 6,
  FODE_STATUS_DEGENERATE_DATA = 7,
  FODE_STATUS_OUT_OF_RANGE = 8,
  FODE_STATUS_IO = 9,
  FODE_STATUS_INVALID_UTF8 = 10,
  FODE_STATUS_PANIC = 11,
} FodeStatus;

typedef enum {
  FODE_STRATEGY_KIND_SERIAL = 0,
  FODE_STRATEGY_KIND_BLOCK = 1,
  FODE_STRATEGY_KIND_REDUCTION = 2,
} FodeStrategyKind;

typedef struct FodeProblem FodeProblem;

typedef struct FodeTrajectory FodeTrajectory;

// Right-hand side callback: write `f(t, y)` into `dy`, both of length `dim`.
// Called concurrently from worker threads by the parallel strategies.
typedef void (*FodeRhsFn)(void *user_data, double t, const double *y, double *dy, size_t dim);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a problem around a C callback. `y0` holds `dim` values.
FodeStatus fode_problem_new_callback(FodeRhsFn rhs,
                                     void *user_data,
                                     double alpha,
                                     double t_end,
                                     const double *y0,
                                     size_t dim,
                                     FodeProblem **out);

// Builds one of the built-in systems by name (`zero`, `constant`,
// `power-law`, `linear`, `hindmarsh-rose`). Pass `y0 = NULL, dim = 0` for
// the system's default initial state.
FodeStatus fode_problem_new_named(const char *system,
                                  const double *params,
                                  size_t n_params,
                                  double alpha,
                                  double t_end,
                                  const double *y0,
                                  size_t dim,
                                  FodeProblem **out);

void fode_problem_free(FodeProblem *problem);

// State dimension, or 0 for a null handle.
size_t fode_problem_dim(const FodeProblem *problem);

// Solves on `n_steps` uniform steps. `workers` is ignored for the serial
// strategy and `chunk` is used only by the reduction strategy.
FodeStatus fode_solve(const FodeProblem *problem,
                      size_t n_steps,
                      FodeStrategyKind strategy,
                      size_t workers,
                      size_t chunk,
                      FodeTrajectory **out);

void fode_trajectory_free(FodeTrajectory *traj);

// Number of grid points (`n_steps + 1`), or 0 for a null handle.
size_t fode_trajectory_len(const FodeTrajectory *traj);

size_t fode_trajectory_dim(const FodeTrajectory *traj);

// Grid times, `len` values. Valid until the trajectory is freed.
const double *fode_trajectory_times(const FodeTrajectory *traj);

// Row-major states, `len * dim` values. Valid until the trajectory is freed.
const double *fode_trajectory_states(const FodeTrajectory *traj);

// Copies the state at grid point `n` into `out` (capacity `cap >= dim`).
FodeStatus fode_trajectory_state(const FodeTrajectory *traj, size_t n, double *out, size_t cap);

// Writes the trajectory CSV (`t,y0,...`) to `path`.
FodeStatus fode_trajectory_write_csv(const FodeTrajectory *traj, const char *path);

FodeStatus fode_predictor_weight(double alpha, uint64_t n, double *out);

FodeStatus fode_corrector_weight_a(double alpha, uint64_t n, double *out);

FodeStatus fode_corrector_weight_c(double alpha, uint64_t n, double *out);

FodeStatus fode_gamma(double x, double *out);

// `E_alpha(z)` for `|z| <= 10`.
FodeStatus fode_mittag_leffler(double alpha, double z, double *out);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `cap - 1` bytes) and returns the full message
// length. Returns 0 when the last call succeeded.
size_t fode_last_error_message(char *buf, size_t cap);

// Step index of the last `FODE_STATUS_STEP` failure on this thread.
// Returns false (and leaves `out` alone) when there is none.
bool fode_last_error_step(size_t *out);

const char *fode_status_name(FodeStatus status);

const char *fode_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FODE_H */
