#ifndef IBSTOKES_H
#define IBSTOKES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IbsStatus {
  IBS_STATUS_OK = 0,
  IBS_STATUS_INVALID_ARGUMENT = 1,
  IBS_STATUS_INVALID_GRID = 2,
  IBS_STATUS_SHAPE_MISMATCH = 3,
  IBS_STATUS_SINGULAR = 4,
  IBS_STATUS_NOT_CONVERGED = 5,
  IBS_STATUS_EMPTY_FAR_FIELD = 6,
  IBS_STATUS_IO = 7,
  IBS_STATUS_CSV = 8,
  IBS_STATUS_NULL_POINTER = 9,
  IBS_STATUS_BUFFER_TOO_SMALL = 10,
  IBS_STATUS_PANIC = 11,
} IbsStatus;

typedef enum IbsMethod {
  IBS_METHOD_THREE_POISSON = 0,
  IBS_METHOD_MAC = 1,
} IbsMethod;

typedef enum IbsKernel {
  IBS_KERNEL_HAT = 0,
  IBS_KERNEL_COSINE = 1,
  IBS_KERNEL_DELTA1 = 2,
} IbsKernel;

typedef enum IbsBoundary {
  IBS_BOUNDARY_DIRICHLET = 0,
  IBS_BOUNDARY_NEUMANN = 1,
} IbsBoundary;

typedef enum IbsComponent {
  IBS_COMPONENT_U = 0,
  IBS_COMPONENT_V = 1,
  IBS_COMPONENT_P = 2,
} IbsComponent;

typedef struct IbsGreen IbsGreen;

typedef struct IbsReport IbsReport;

/**
 * Solved example: velocity and pressure fields with their errors.
 */
typedef struct IbsSolution IbsSolution;

typedef struct IbsErrors {
  double err_u_inf;
  double err_p_l2;
  double err_p_far;
} IbsErrors;

/**
 * One report row; rates are NaN where undefined.
 */
typedef struct IbsRow {
  size_t n;
  struct IbsErrors errors;
  double rate_u;
  double rate_p;
  double rate_p_far;
} IbsRow;

typedef struct IbsDecay {
  double c0;
  double c1;
  double c2;
  double envelope_margin;
} IbsDecay;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ibs_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to
 * `len`). Returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ibs_last_error_message(char *buf, size_t len);

/**
 * `δ_h(r)` for the given kernel.
 *
 * # Safety
 * `out` must be null or valid for a write.
 */
enum IbsStatus ibs_kernel_eval(uint32_t k, double r, double h, double *out);

/**
 * Solves the circular-interface example on an `n × n` grid with relative tolerance `tol`.
 *
 * # Safety
 * `out` must be null or valid for a write. On success `*out` owns a handle for
 * [`ibs_solution_free`].
 */
enum IbsStatus ibs_solve_example(uint32_t m,
                                 uint32_t k,
                                 size_t n,
                                 double tol,
                                 struct IbsSolution **out);

/**
 * # Safety
 * `sol` must be a live handle; `out` must be valid for a write.
 */
enum IbsStatus ibs_solution_errors(const struct IbsSolution *sol, struct IbsErrors *out);

/**
 * Pressure pin index (node for three-Poisson, cell for MAC).
 *
 * # Safety
 * `sol` must be a live handle; `i` and `j` must be valid for writes.
 */
enum IbsStatus ibs_solution_pin(const struct IbsSolution *sol, size_t *i, size_t *j);

/**
 * Array shape of one component.
 *
 * # Safety
 * `sol` must be a live handle; `nx` and `ny` must be valid for writes.
 */
enum IbsStatus ibs_solution_dims(const struct IbsSolution *sol, uint32_t c, size_t *nx, size_t *ny);

/**
 * Copies one component, row-major with `i` fastest, into `buf` of `len` doubles.
 *
 * # Safety
 * `sol` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum IbsStatus ibs_solution_copy(const struct IbsSolution *sol,
                                 uint32_t c,
                                 double *buf,
                                 size_t len);

/**
 * # Safety
 * `sol` must be null or a handle from [`ibs_solve_example`] not yet freed.
 */
void ibs_solution_free(struct IbsSolution *sol);

/**
 * Grid-refinement study over `grids[0..count]`.
 *
 * # Safety
 * `grids` must point to `count` values; `out` must be valid for a write.
 */
enum IbsStatus ibs_convergence_study(uint32_t m,
                                     uint32_t k,
                                     const size_t *grids,
                                     size_t count,
                                     double tol,
                                     struct IbsReport **out);

/**
 * # Safety
 * `rep` must be a live handle; `out` must be valid for a write.
 */
enum IbsStatus ibs_report_len(const struct IbsReport *rep, size_t *out);

/**
 * # Safety
 * `rep` must be a live handle; `out` must be valid for a write.
 */
enum IbsStatus ibs_report_row(const struct IbsReport *rep, size_t index, struct IbsRow *out);

/**
 * Writes the report CSV to `path`.
 *
 * # Safety
 * `rep` must be a live handle; `path` a NUL-terminated UTF-8 string.
 */
enum IbsStatus ibs_report_write_csv(const struct IbsReport *rep, const char *path);

/**
 * # Safety
 * `rep` must be null or a handle from [`ibs_convergence_study`] not yet freed.
 */
void ibs_report_free(struct IbsReport *rep);

/**
 * Discrete Green function on `[−1, 1]²` centred at the node nearest `(x, y)`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IbsStatus ibs_green(uint32_t bc,
                         size_t n,
                         double x,
                         double y,
                         double tol,
                         struct IbsGreen **out);

/**
 * # Safety
 * `g` must be a live handle; `out` must be valid for a write.
 */
enum IbsStatus ibs_green_identity_residual(const struct IbsGreen *g, double *out);

/**
 * # Safety
 * `g` must be a live handle; `out` must be valid for a write.
 */
enum IbsStatus ibs_green_decay(const struct IbsGreen *g, struct IbsDecay *out);

/**
 * Value at node `(i, j)`.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid for a write.
 */
enum IbsStatus ibs_green_value(const struct IbsGreen *g, size_t i, size_t j, double *out);

/**
 * # Safety
 * `g` must be null or a handle from [`ibs_green`] not yet freed.
 */
void ibs_green_free(struct IbsGreen *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IBSTOKES_H */
