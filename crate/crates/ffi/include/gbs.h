#ifndef GBS_H
#define GBS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum GbsStatus {
  GBS_STATUS_OK = 0,
  // A required pointer argument was null.
  GBS_STATUS_NULL_POINTER = 1,
  // Malformed input: bad matrix, index out of range, invalid label.
  GBS_STATUS_INVALID_ARGUMENT = 2,
  // A parameter outside the domain of the requested quantity.
  GBS_STATUS_DOMAIN = 3,
  // The coherence solve could not be certified.
  GBS_STATUS_SOLVER_FAILURE = 4,
  // Noisy repetition-coded search eliminated every hypothesis.
  GBS_STATUS_EMPTY_VERSION_SPACE = 5,
  // An internal panic was caught at the boundary.
  GBS_STATUS_PANIC = 6,
} GbsStatus;

// A posterior over the hypotheses of one space.
typedef struct GbsPosterior GbsPosterior;

// A finite hypothesis space with its response matrix.
typedef struct GbsSpace GbsSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the full message length, or 0
// when there is none. Pass a null `buf` to query the length.
size_t gbs_last_error_message(char *buf, size_t len);

// Builds a space from a row-major `rows x cols` matrix of +1/-1 entries.
// Duplicate columns are merged into one cell.
enum GbsStatus gbs_space_from_matrix(const int8_t *data,
                                     size_t rows,
                                     size_t cols,
                                     struct GbsSpace **out);

// `n` thresholds on the unit interval.
enum GbsStatus gbs_space_thresholds(size_t n, struct GbsSpace **out);

// `n` intervals of length `1/n` tiling the unit interval.
enum GbsStatus gbs_space_disjoint_intervals(size_t n, struct GbsSpace **out);

// Halfspaces `sign(a_i . x + b_i)` in `d` dimensions. `normals` holds `n`
// unit vectors row-major, `offsets` the `n` offsets. A positive `cube`
// restricts the query space to `(-cube, cube)^d`.
enum GbsStatus gbs_space_halfspaces(const double *normals,
                                    const double *offsets,
                                    size_t n,
                                    size_t d,
                                    double cube,
                                    struct GbsSpace **out);

// Releases a space. Null is ignored.
void gbs_space_free(struct GbsSpace *space);

enum GbsStatus gbs_space_dims(const struct GbsSpace *space, size_t *n_hypotheses, size_t *n_cells);

// Response (+1 or -1) of hypothesis `h` on cell `cell`.
enum GbsStatus gbs_space_response(const struct GbsSpace *space, size_t h, size_t cell, int8_t *out);

// Coherence `c*` with its certifying distribution. `p`, when not null,
// must hold `n_cells` doubles; `worst` may be null.
enum GbsStatus gbs_coherence(const struct GbsSpace *space,
                             double tolerance,
                             double *c_star,
                             double *p,
                             size_t *worst);

enum GbsStatus gbs_minimal_k(const struct GbsSpace *space, size_t *out);

enum GbsStatus gbs_is_k_neighborly(const struct GbsSpace *space, size_t k, bool *out);

// Per-query reduction factor of the splitting search.
enum GbsStatus gbs_rate(double c_star, size_t k, double *out);

// Query ceiling of the noiseless splitting search on `n` hypotheses.
enum GbsStatus gbs_query_bound(size_t n, double lambda, size_t *out);

enum GbsStatus gbs_epsilon0(double alpha, double beta, double *out);

// Error decay constant of the modified soft-decision search.
enum GbsStatus gbs_sgbs_rate(double c_star, double alpha, double beta, double *out);

// Odd vote count per query so that `n0` majority votes all succeed with
// probability at least `1 - delta`.
enum GbsStatus gbs_ngbs_repetitions(size_t n0, double delta, double alpha, size_t *out);

// Noiseless splitting search against a simulated `truth`. Ties are broken
// at random from `(seed, trial)`.
enum GbsStatus gbs_run_gbs(const struct GbsSpace *space,
                           size_t truth,
                           uint64_t seed,
                           uint64_t trial,
                           size_t *queries,
                           size_t *outcome);

// Splitting search with `repetitions` majority votes per query against a
// simulated `truth` whose responses flip with probability `alpha`.
enum GbsStatus gbs_run_ngbs(const struct GbsSpace *space,
                            size_t truth,
                            double alpha,
                            size_t repetitions,
                            uint64_t seed,
                            uint64_t trial,
                            size_t *queries,
                            size_t *outcome);

// Soft-decision search for `budget` queries with update parameter `beta`
// against a simulated `truth` flipping with probability `alpha`. `modified`
// selects the randomized 1-neighbor query rule. Writes the posterior mode.
enum GbsStatus gbs_run_sgbs(const struct GbsSpace *space,
                            size_t truth,
                            double alpha,
                            double beta,
                            size_t budget,
                            bool modified,
                            uint64_t seed,
                            uint64_t trial,
                            size_t *outcome);

// Uniform posterior over `n` hypotheses.
enum GbsStatus gbs_posterior_uniform(size_t n, struct GbsPosterior **out);

// Posterior proportional to `n` nonnegative weights.
enum GbsStatus gbs_posterior_from_weights(const double *weights,
                                          size_t n,
                                          struct GbsPosterior **out);

// Releases a posterior. Null is ignored.
void gbs_posterior_free(struct GbsPosterior *posterior);

// Multiplicative update after observing `label` (+1 or -1) on `cell`.
enum GbsStatus gbs_posterior_update(struct GbsPosterior *posterior,
                                    const struct GbsSpace *space,
                                    size_t cell,
                                    int8_t label,
                                    double beta);

// Copies the probabilities into `out`, which must hold `len` doubles with
// `len` equal to the number of hypotheses.
enum GbsStatus gbs_posterior_probs(const struct GbsPosterior *posterior, double *out, size_t len);

// `(1 - p(truth)) / p(truth)`.
enum GbsStatus gbs_posterior_cn(const struct GbsPosterior *posterior, size_t truth, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GBS_H */
