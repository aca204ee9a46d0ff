#ifndef ZAKHAROV_H
#define ZAKHAROV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZakStatus {
  ZAK_STATUS_OK = 0,
  ZAK_STATUS_NULL_POINTER = 1,
  ZAK_STATUS_INVALID_ARGUMENT = 2,
  ZAK_STATUS_CONFIG = 3,
  ZAK_STATUS_RESONANCE = 4,
  ZAK_STATUS_DIVERGED = 5,
  ZAK_STATUS_BLOW_UP = 6,
  ZAK_STATUS_UNATTAINABLE = 7,
  ZAK_STATUS_IO = 8,
  ZAK_STATUS_PANIC = 9,
  ZAK_STATUS_BUFFER_TOO_SMALL = 10,
} ZakStatus;

typedef enum ZakScheme {
  ZAK_SCHEME_STRANG_SPLIT = 0,
  ZAK_SCHEME_LAWSON_RK2 = 1,
} ZakScheme;

typedef enum ZakNonlinearity {
  /**
   * `Re N · u`
   */
  ZAK_NONLINEARITY_PHYSICAL = 0,
  /**
   * `N · u`
   */
  ZAK_NONLINEARITY_ANALYTIC = 1,
} ZakNonlinearity;

/**
 * Periodic grid `[0, L)^d` with `n` points per axis.
 */
typedef struct ZakGrid ZakGrid;

/**
 * Pair `(u, N)` at a time `t`.
 */
typedef struct ZakState ZakState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *zak_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full length including the NUL, or 0 when
 * no message is pending. A successful `zak_run_config` that stopped on a
 * finding leaves the finding's message here.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t zak_last_error(char *buf, size_t cap);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ZakStatus zak_grid_new(size_t dim, size_t n, double length, struct ZakGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from [`zak_grid_new`] not yet freed.
 */
void zak_grid_free(struct ZakGrid *grid);

/**
 * Number of grid points `n^d`, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t zak_grid_len(const struct ZakGrid *grid);

/**
 * Builds a state at `t = 0` from physical samples of `u = u_re + i u_im`,
 * the density `n0` and its time derivative `n1` (mean zero). All arrays hold
 * `len = n^d` values in row-major order.
 *
 * # Safety
 * Pointers must be valid for `len` reads; `out` must be writable.
 */
enum ZakStatus zak_state_from_physical(const struct ZakGrid *grid,
                                       double alpha,
                                       const double *u_re,
                                       const double *u_im,
                                       const double *n0,
                                       const double *n1,
                                       size_t len,
                                       struct ZakState **out);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
void zak_state_free(struct ZakState *state);

/**
 * Writes the physical fields of `state` into caller buffers of length `len`.
 *
 * # Safety
 * `state` must be live; buffers must be valid for `len` writes.
 */
enum ZakStatus zak_state_read(const struct ZakState *state,
                              double *u_re,
                              double *u_im,
                              double *n0,
                              double *n1,
                              size_t len);

/**
 * Current time, mass `‖u‖²` and energy of `state`; null outputs are skipped.
 *
 * # Safety
 * `state` must be live; non-null outputs must be writable.
 */
enum ZakStatus zak_state_invariants(const struct ZakState *state,
                                    double *t,
                                    double *mass_out,
                                    double *energy_out);

/**
 * Advances `state` in place to `t_end` with steps `dt`; `t_end - t` must be
 * a whole number of steps. On failure the state is left unchanged.
 *
 * # Safety
 * `state` must be a live handle.
 */
enum ZakStatus zak_state_evolve(struct ZakState *state,
                                double dt,
                                double t_end,
                                enum ZakScheme scheme,
                                enum ZakNonlinearity mode);

/**
 * Applies the normal-form map with frequency gap `gap` (at least 5), or its
 * inverse when `inverse` is nonzero, writing a new state to `out`.
 *
 * # Safety
 * `state` must be live and `out` writable.
 */
enum ZakStatus zak_state_normal_form(const struct ZakState *state,
                                     uint32_t gap,
                                     int32_t inverse,
                                     struct ZakState **out);

/**
 * Runs the experiment described by the TOML text `config` into `outdir`
 * (null: the configured or default location). `exit_code` receives the
 * command-line exit code: 0 on success, 1 when the run stopped on a finding
 * written to `error.json`.
 *
 * # Safety
 * `config` must be a NUL-terminated string, `outdir` null or one, and
 * `exit_code` null or writable.
 */
enum ZakStatus zak_run_config(const char *config, const char *outdir, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZAKHAROV_H */
