#ifndef THINFILM_H
#define THINFILM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TF_BOUNDARY_PERIODIC 0

#define TF_BOUNDARY_NEUMANN 1

/**
 * Result codes. Values 2 to 4 match the command-line exit codes.
 */
typedef enum TfStatus {
  TF_STATUS_OK = 0,
  TF_STATUS_INVALID_ARGUMENT = 1,
  TF_STATUS_CONFIG = 2,
  TF_STATUS_NON_CONVERGENCE = 3,
  TF_STATUS_BLOW_UP = 4,
  TF_STATUS_IO = 5,
  TF_STATUS_INTERNAL = 6,
} TfStatus;

typedef struct TfField TfField;

typedef struct TfGrid TfGrid;

typedef struct TfSpec TfSpec;

typedef struct TfTrajectory TfTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message, without the terminating NUL.
 */
size_t tf_last_error_length(void);

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len − 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t tf_last_error_message(char *buf, size_t len);

/**
 * Creates a grid with `dims` axes.
 *
 * # Safety
 * `extents` and `points` must point to `dims` values; `out` must be writable.
 */
enum TfStatus tf_grid_new(size_t dims,
                          const double *extents,
                          const size_t *points,
                          int32_t boundary,
                          struct TfGrid **out);

/**
 * Number of grid points.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t tf_grid_len(const struct TfGrid *grid);

/**
 * # Safety
 * `grid` must be null or a handle from [`tf_grid_new`] not yet freed.
 */
void tf_grid_free(struct TfGrid *grid);

/**
 * Creates a field from `len` row-major samples.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` must be writable.
 */
enum TfStatus tf_field_new(const struct TfGrid *grid,
                           const double *values,
                           size_t len,
                           struct TfField **out);

/**
 * Copies the samples of `field` into `buf`, which must hold exactly the
 * grid length.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum TfStatus tf_field_values(const struct TfField *field, double *buf, size_t len);

/**
 * # Safety
 * `field` must be null or a live handle.
 */
void tf_field_free(struct TfField *field);

/**
 * g ≡ 0.
 *
 * # Safety
 * `out` must be writable.
 */
enum TfStatus tf_spec_zero(struct TfSpec **out);

/**
 * g(ξ) = (c|ξ|² + 1)ξ.
 *
 * # Safety
 * `out` must be writable.
 */
enum TfStatus tf_spec_cubic(double c, struct TfSpec **out);

/**
 * g(ξ) = |ξ|^{α−1}ξ.
 *
 * # Safety
 * `out` must be writable.
 */
enum TfStatus tf_spec_power(double alpha, struct TfSpec **out);

/**
 * # Safety
 * `spec` must be null or a live handle.
 */
void tf_spec_free(struct TfSpec *spec);

/**
 * Runs the semi-implicit Neumann scheme with `steps` steps to time `horizon`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum TfStatus tf_rothe_run(const struct TfField *u0,
                           const struct TfSpec *spec,
                           double horizon,
                           size_t steps,
                           struct TfTrajectory **out);

/**
 * Number of stored states, including the initial one.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t tf_trajectory_len(const struct TfTrajectory *traj);

/**
 * Copies state `index` into a new field handle.
 *
 * # Safety
 * `traj` must be live; `out` must be writable.
 */
enum TfStatus tf_trajectory_state(const struct TfTrajectory *traj,
                                  size_t index,
                                  struct TfField **out);

/**
 * # Safety
 * `traj` must be null or a live handle.
 */
void tf_trajectory_free(struct TfTrajectory *traj);

/**
 * Linear evolution of `u0` over time `t` on a periodic grid.
 *
 * # Safety
 * `u0` must be live; `out` must be writable.
 */
enum TfStatus tf_heat_propagate(const struct TfField *u0, double t, struct TfField **out);

/**
 * Radial kernel profile f_N(η).
 *
 * # Safety
 * `out` must be writable.
 */
enum TfStatus tf_kernel_profile(size_t dimension, double eta, double *out);

/**
 * Closed-form bound for y′ ≤ c₁y^{1+σ} + c₂. Sets `*blow_up` to 1 (and
 * `*out` to infinity) when t is at or past the blow-up time.
 *
 * # Safety
 * `out` and `blow_up` must be writable.
 */
enum TfStatus tf_gronwall_bound(double y0,
                                double sigma,
                                double c1,
                                double c2,
                                double t,
                                double *out,
                                int32_t *blow_up);

/**
 * Parses `config_text` for `subcommand` and runs it, writing artifacts
 * into `out_dir` exactly as the command-line tool does.
 *
 * # Safety
 * All pointers must be NUL-terminated strings.
 */
enum TfStatus tf_run(const char *subcommand, const char *config_text, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THINFILM_H */
