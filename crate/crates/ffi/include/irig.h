#ifndef IRIG_H
#define IRIG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IrigStatus {
  IRIG_STATUS_OK = 0,
  IRIG_STATUS_NULL_POINTER = 1,
  IRIG_STATUS_INVALID_ARGUMENT = 2,
  IRIG_STATUS_DIMENSION_MISMATCH = 3,
  IRIG_STATUS_NON_FINITE = 4,
  IRIG_STATUS_INVALID_SCHEDULE = 5,
  IRIG_STATUS_INFEASIBLE = 6,
  IRIG_STATUS_PARSE = 7,
  IRIG_STATUS_IO = 8,
  IRIG_STATUS_CONFIG = 9,
  IRIG_STATUS_RATE_FIT = 10,
  IRIG_STATUS_PANIC = 11,
} IrigStatus;

// Problem instance handle.
typedef struct IrigProblem IrigProblem;

// Finished run: averaged iterate and trace.
typedef struct IrigRun IrigRun;

// Step/regularization schedule handle.
typedef struct IrigSchedule IrigSchedule;

// One recorded trace row. Unknown values are NaN.
typedef struct IrigTraceRow {
  uint64_t k;
  double f_bar;
  double f_gap;
  double h_bar;
  double dist_xstar;
  double gamma_k;
  double lambda_k;
} IrigTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until
// the next call into this library on the same thread.
const char *irig_last_error(void);

// Two-dimensional test problem: `f1 = f2 = |x1|`,
// `h = ½‖x − (1, 1.5)‖²` on `[-2, 2]²`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum IrigStatus irig_problem_p2(struct IrigProblem **out);

// Selection problem `f_i = Σ_{j∈Z} |x_j|` (`multiplicity` copies) on the
// cube `[-half_width, half_width]^dim`. The upper level is
// `(mu/2)‖x − center‖²`, or the elastic net with `mu` when `center` is NULL.
//
// # Safety
// `zero_coords` must hold `n_zero` entries; `center`, if not NULL, `dim`.
enum IrigStatus irig_problem_selection(size_t dim,
                                       double half_width,
                                       const size_t *zero_coords,
                                       size_t n_zero,
                                       size_t multiplicity,
                                       const double *center,
                                       double mu,
                                       struct IrigProblem **out);

// Feasibility problem for `⟨c_i, x⟩ ≤ d_i`, one penalty component per
// constraint, on the box `[lower, upper]`. `normals` is row-major
// `n_constraints × dim`. Upper level as in [`irig_problem_selection`].
//
// # Safety
// Arrays must have the stated lengths; `center` may be NULL.
enum IrigStatus irig_problem_constrained(size_t dim,
                                         const double *normals,
                                         const double *offsets,
                                         size_t n_constraints,
                                         const double *lower,
                                         const double *upper,
                                         const double *center,
                                         double mu,
                                         struct IrigProblem **out);

// Hinge-loss problem from an svmlight file split into `m` batches, with
// an elastic-net upper level on the cube of the given half width.
//
// # Safety
// `path` must be a NUL-terminated string.
enum IrigStatus irig_problem_svmlight(const char *path,
                                      size_t m,
                                      double mu_h,
                                      double half_width,
                                      struct IrigProblem **out);

// Problem described by the `[problem]` section of a config file.
//
// # Safety
// `path` must be a NUL-terminated string.
enum IrigStatus irig_problem_from_config(const char *path, struct IrigProblem **out);

// # Safety
// `p` must be a live handle; the out pointers must be writable or NULL.
enum IrigStatus irig_problem_info(const struct IrigProblem *p,
                                  size_t *dim,
                                  size_t *m,
                                  double *mu_h);

// # Safety
// `p` must be NULL or a handle not yet freed.
void irig_problem_free(struct IrigProblem *p);

// `γ_k = gamma0/(k+1)^a`, `λ_k = lambda0/(k+1)^b`, averaging weights `γ_k^r`.
//
// # Safety
// `out` must be writable.
enum IrigStatus irig_schedule_new(double gamma0,
                                  double lambda0,
                                  double a,
                                  double b,
                                  double r,
                                  struct IrigSchedule **out);

// Schedule with `a = (1+ε)/2`, `b = 1/2 − ε`.
//
// # Safety
// `out` must be writable.
enum IrigStatus irig_schedule_rate(double epsilon,
                                   double gamma0,
                                   double lambda0,
                                   double r,
                                   struct IrigSchedule **out);

// Writes the violation bitmask to `mask`: bit `i` is set when check `i`
// fails (0 step product, 1 `a > b`, 2 `a > 1/2`, 3 `a + b < 1`,
// 4 `a·r ≤ 1`, 5 `r < 1`). Zero means admissible.
//
// # Safety
// `s` must be a live handle and `mask` writable.
enum IrigStatus irig_schedule_validate(const struct IrigSchedule *s,
                                       size_t m,
                                       double mu_h,
                                       uint32_t *mask);

// # Safety
// `s` must be NULL or a handle not yet freed.
void irig_schedule_free(struct IrigSchedule *s);

// Runs `n_iters` outer iterations. `x0` may be NULL (origin) or hold
// `x0_len == dim` entries. Rows are recorded every `record_stride`
// iterations and at the last one.
//
// # Safety
// Handles must be live and `out` writable.
enum IrigStatus irig_run(const struct IrigProblem *p,
                         const struct IrigSchedule *s,
                         size_t n_iters,
                         const double *x0,
                         size_t x0_len,
                         size_t record_stride,
                         bool allow_invalid_schedule,
                         struct IrigRun **out);

// Copies the averaged iterate; `len` must equal the dimension.
//
// # Safety
// `run` must be live and `buf` hold `len` doubles.
enum IrigStatus irig_run_x_bar(const struct IrigRun *run, double *buf, size_t len);

// # Safety
// `run` must be live and `len` writable.
enum IrigStatus irig_run_trace_len(const struct IrigRun *run, size_t *len);

// # Safety
// `run` must be live and `row` writable.
enum IrigStatus irig_run_trace_row(const struct IrigRun *run,
                                   size_t index,
                                   struct IrigTraceRow *row);

// Writes the trace as a metrics CSV.
//
// # Safety
// `run` must be live and `path` NUL-terminated.
enum IrigStatus irig_run_write_csv(const struct IrigRun *run, const char *path);

// Log-log slope of `f_gap` against `k` after dropping a leading fraction
// of rows.
//
// # Safety
// `run` must be live; `slope` and `intercept` writable.
enum IrigStatus irig_run_fit_rate(const struct IrigRun *run,
                                  double burn_in_fraction,
                                  double *slope,
                                  double *intercept);

// # Safety
// `run` must be NULL or a handle not yet freed.
void irig_run_free(struct IrigRun *run);

// Approximate minimizer of `f + lambda·h` over the feasible set, written
// to `buf` (`len` must equal the dimension).
//
// # Safety
// `p` must be live and `buf` hold `len` doubles.
enum IrigStatus irig_reference(const struct IrigProblem *p,
                               double lambda,
                               size_t iters,
                               double *buf,
                               size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IRIG_H */
