#ifndef SMMC_H
#define SMMC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum SmmcStatus {
  SMMC_STATUS_OK = 0,
  SMMC_STATUS_NULL_POINTER = 1,
  SMMC_STATUS_INVALID_ARGUMENT = 2,
  SMMC_STATUS_MISALIGNED_THRESHOLD = 3,
  SMMC_STATUS_INITIALIZATION = 4,
  SMMC_STATUS_DEGENERATE_LEVEL = 5,
  SMMC_STATUS_NON_CONVERGENCE = 6,
  SMMC_STATUS_NUMERIC = 7,
  SMMC_STATUS_RESOLUTION = 8,
  SMMC_STATUS_BUFFER_TOO_SMALL = 9,
  SMMC_STATUS_NO_DISTRIBUTION = 10,
  SMMC_STATUS_PANIC = 11,
  SMMC_STATUS_INTERNAL = 12,
} SmmcStatus;

/**
 * Opaque problem handle.
 */
typedef struct SmmcProblem SmmcProblem;

/**
 * Opaque result handle.
 */
typedef struct SmmcResult SmmcResult;

typedef struct SmmcSamplerOptions {
  /**
   * Half-width of the uniform proposal window in every dimension.
   */
  double proposal_half_width;
  size_t burn_in;
  /**
   * Run chains on several threads. The performance callback must then be
   * safe to call concurrently.
   */
  bool parallel;
} SmmcSamplerOptions;

typedef struct SmmcSmmcOptions {
  double alpha;
  size_t n_per_iter;
  size_t k_iters;
  size_t max_subsets;
  struct SmmcSamplerOptions sampler;
} SmmcSmmcOptions;

typedef struct SmmcMmcOptions {
  size_t k_iters;
  size_t n_per_iter;
  struct SmmcSamplerOptions sampler;
} SmmcMmcOptions;

typedef struct SmmcSsOptions {
  double gamma;
  size_t n_per_level;
  size_t max_levels;
  struct SmmcSamplerOptions sampler;
} SmmcSsOptions;

/**
 * Performance function callback: `x` points to `dim` inputs.
 */
typedef double (*SmmcPerformFn)(const double *x, size_t dim, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *smmc_last_error(void);

struct SmmcSamplerOptions smmc_sampler_options_default(void);

struct SmmcSmmcOptions smmc_smmc_options_default(void);

struct SmmcMmcOptions smmc_mmc_options_default(void);

struct SmmcSsOptions smmc_ss_options_default(void);

/**
 * Built-in problem: `two-circle`, `norm10`, `quarter-car` or `gauss1d`,
 * with its default grid.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum SmmcStatus smmc_problem_builtin(const char *name, struct SmmcProblem **out);

/**
 * Problem with `dim` independent standard normal inputs and performance
 * function `perform`. Failure is `perform(x) > threshold`. The problem has
 * no grid until [`smmc_problem_set_grid`] is called, which MMC and SMMC
 * require.
 *
 * # Safety
 * `perform` must be callable with `user_data` for as long as the problem
 * lives, and from several threads if any run sets `parallel`. It should
 * return finite values.
 */
enum SmmcStatus smmc_problem_custom(const char *name,
                                    size_t dim,
                                    SmmcPerformFn perform,
                                    void *user_data,
                                    double threshold,
                                    struct SmmcProblem **out);

/**
 * # Safety
 * `problem` must be a live handle.
 */
enum SmmcStatus smmc_problem_set_threshold(struct SmmcProblem *problem, double threshold);

/**
 * Output grid of `m` equal bins on `[a, b]`.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum SmmcStatus smmc_problem_set_grid(struct SmmcProblem *problem, double a, double b, size_t m);

/**
 * # Safety
 * `problem` must be a live handle.
 */
size_t smmc_problem_dim(const struct SmmcProblem *problem);

/**
 * # Safety
 * `problem` must be NULL or a handle not yet freed.
 */
void smmc_problem_free(struct SmmcProblem *problem);

/**
 * Subset multicanonical Monte Carlo.
 *
 * # Safety
 * `problem` must be a live handle, `options` NULL (defaults) or valid, and
 * `out` writable.
 */
enum SmmcStatus smmc_run_smmc(const struct SmmcProblem *problem,
                              const struct SmmcSmmcOptions *options,
                              uint64_t seed,
                              struct SmmcResult **out);

/**
 * Multicanonical Monte Carlo over the problem's whole grid.
 *
 * # Safety
 * As [`smmc_run_smmc`].
 */
enum SmmcStatus smmc_run_mmc(const struct SmmcProblem *problem,
                             const struct SmmcMmcOptions *options,
                             uint64_t seed,
                             struct SmmcResult **out);

/**
 * Subset simulation. The result carries no distribution.
 *
 * # Safety
 * As [`smmc_run_smmc`].
 */
enum SmmcStatus smmc_run_ss(const struct SmmcProblem *problem,
                            const struct SmmcSsOptions *options,
                            uint64_t seed,
                            struct SmmcResult **out);

/**
 * Plain Monte Carlo with `n` prior draws. Histograms onto the grid when the
 * problem has one.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SmmcStatus smmc_run_mc(const struct SmmcProblem *problem,
                            size_t n,
                            uint64_t seed,
                            struct SmmcResult **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
double smmc_result_pf(const struct SmmcResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t smmc_result_evals(const struct SmmcResult *result);

/**
 * Number of grid bins in the estimated distribution, 0 if there is none.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t smmc_result_bin_count(const struct SmmcResult *result);

/**
 * Copies the complementary CDF: `edges[i]` is the left edge of bin `i` and
 * `tail[i]` the estimated probability of exceeding it. Both buffers must
 * hold `len` values; `len` must be at least [`smmc_result_bin_count`].
 *
 * # Safety
 * `edges` and `tail` must each point to `len` writable doubles.
 */
enum SmmcStatus smmc_result_ccdf(const struct SmmcResult *result,
                                 double *edges,
                                 double *tail,
                                 size_t len);

/**
 * # Safety
 * `result` must be NULL or a handle not yet freed.
 */
void smmc_result_free(struct SmmcResult *result);

/**
 * Exact failure probability of a built-in problem at `threshold`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum SmmcStatus smmc_reference_pf(const char *name, double threshold, double *out);

/**
 * `P(chi^2_d > t)`; NaN for `d == 0`.
 */
double smmc_chi2_tail(uint32_t d, double t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMMC_H */
