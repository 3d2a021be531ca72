#ifndef REGIMELAB_H
#define REGIMELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Regime label codes used in label arrays.
 */
typedef enum RlLabel {
  RL_LABEL_NP = 0,
  RL_LABEL_FR = 1,
  RL_LABEL_MN = 2,
} RlLabel;

/**
 * Result code of every fallible call.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_DOMAIN = 2,
  RL_STATUS_PARAMETER = 3,
  RL_STATUS_KINK = 4,
  RL_STATUS_PARSE = 5,
  RL_STATUS_SCHEMA = 6,
  RL_STATUS_ORDER = 7,
  RL_STATUS_SHAPE = 8,
  RL_STATUS_NUMERIC = 9,
  RL_STATUS_CALIBRATION_UNAVAILABLE = 10,
  RL_STATUS_IO = 11,
  RL_STATUS_BUFFER_TOO_SMALL = 12,
  RL_STATUS_INVALID_LABEL = 13,
  RL_STATUS_PANIC = 14,
} RlStatus;

/**
 * Opaque labeled corpus.
 */
typedef struct RlCorpus RlCorpus;

/**
 * Opaque MAP fit.
 */
typedef struct RlFit RlFit;

typedef struct RlModelParams {
  double beta;
  double alpha;
  double gamma;
  double tau_a;
  double tau_p;
  double kappa;
  double eps_p;
} RlModelParams;

/**
 * Flat mirror of the estimator configuration.
 */
typedef struct RlFitConfig {
  double lambda;
  double beta_fixed;
  double tau_a_hat;
  double tau_p_hat;
  double lam_alpha;
  double lam_gamma;
  double lam_kappa;
  double gauge_w;
  double eps_p;
  uint64_t max_iterations;
  double gradient_tolerance;
  uint64_t seed;
} RlFitConfig;

typedef struct RlRegimeProbs {
  double p_fr_lat;
  double p_mn_lat;
  double z_mn;
  double p_mn;
  double p_fr;
  double p_np;
} RlRegimeProbs;

typedef struct RlSensitivity {
  double d_p_np;
  double d_p_fr;
  double d_p_mn;
  double d2_p_fr;
  double d_p_fr_lat;
  double d_p_mn_lat;
} RlSensitivity;

typedef struct RlObjective {
  double neg_logpost;
  double neg_loglik;
  double pen_rw;
  double gauge_pen;
  double pen_l2;
} RlObjective;

/**
 * Fitted global parameters and optimizer outcome.
 */
typedef struct RlFitSummary {
  double alpha_hat;
  double gamma_hat;
  double kappa_hat;
  bool converged;
  uint64_t iterations;
} RlFitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void rl_string_free(char *s);

struct RlModelParams rl_model_params_default(void);

struct RlFitConfig rl_fit_config_default(void);

/**
 * Clamped regime probabilities at `gap`.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum RlStatus rl_regime_probs(double gap,
                              const struct RlModelParams *params,
                              struct RlRegimeProbs *out);

/**
 * Analytic derivatives with respect to the gap.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum RlStatus rl_derivs_wrt_gap(double gap,
                                const struct RlModelParams *params,
                                struct RlSensitivity *out);

/**
 * Largest relative error between analytic and finite-difference slopes.
 *
 * # Safety
 * `params` and `rel_error` must be valid pointers.
 */
enum RlStatus rl_finite_diff_check(double gap,
                                   const struct RlModelParams *params,
                                   double step,
                                   double *rel_error);

/**
 * Parse a corpus from JSON bytes.
 *
 * # Safety
 * `json` must point to `len` readable bytes; `corpus_out` must be valid.
 */
enum RlStatus rl_corpus_load_json(const uint8_t *json,
                                  size_t len,
                                  struct RlCorpus **corpus_out);

/**
 * Corpus with turns `1..=len` carrying the given label codes.
 *
 * # Safety
 * `labels` must point to `len` readable `RlLabel` values (as `int`);
 * `corpus_out` must be valid.
 */
enum RlStatus rl_corpus_from_labels(const int32_t *labels,
                                    size_t len,
                                    struct RlCorpus **corpus_out);

/**
 * Number of turns; 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live handle.
 */
size_t rl_corpus_len(const struct RlCorpus *corpus);

/**
 * Label codes in corpus order.
 *
 * # Safety
 * `corpus` must be a live handle; `buf` must hold `cap` values; `len_out`
 * may be NULL.
 */
enum RlStatus rl_corpus_labels(const struct RlCorpus *corpus,
                               enum RlLabel *buf,
                               size_t cap,
                               size_t *len_out);

/**
 * Original turn indices in corpus order.
 *
 * # Safety
 * As for [`rl_corpus_labels`].
 */
enum RlStatus rl_corpus_turns(const struct RlCorpus *corpus,
                              uint32_t *buf,
                              size_t cap,
                              size_t *len_out);

/**
 * Dynamics table (cumulative counts and sliding proportions) as CSV.
 *
 * # Safety
 * `corpus` must be a live handle; `csv_out` must be valid.
 */
enum RlStatus rl_corpus_dynamics_csv(const struct RlCorpus *corpus,
                                     size_t window,
                                     char **csv_out);

/**
 * # Safety
 * `corpus` must be NULL or a handle not yet freed.
 */
void rl_corpus_free(struct RlCorpus *corpus);

/**
 * MAP fit of the gap trajectory.
 *
 * # Safety
 * `corpus` must be a live handle; `config` and `fit_out` must be valid.
 */
enum RlStatus rl_fit_map(const struct RlCorpus *corpus,
                         const struct RlFitConfig *config,
                         struct RlFit **fit_out);

/**
 * Number of fitted turns; 0 for NULL.
 *
 * # Safety
 * `fit` must be NULL or a live handle.
 */
size_t rl_fit_len(const struct RlFit *fit);

/**
 * Fitted gap trajectory.
 *
 * # Safety
 * `fit` must be a live handle; `buf` must hold `cap` values; `len_out`
 * may be NULL.
 */
enum RlStatus rl_fit_trajectory(const struct RlFit *fit,
                                double *buf,
                                size_t cap,
                                size_t *len_out);

/**
 * Reconstructed per-turn probabilities.
 *
 * # Safety
 * As for [`rl_fit_trajectory`].
 */
enum RlStatus rl_fit_probs(const struct RlFit *fit,
                           struct RlRegimeProbs *buf,
                           size_t cap,
                           size_t *len_out);

/**
 * Per-turn sensitivities along the fitted trajectory.
 *
 * # Safety
 * As for [`rl_fit_trajectory`].
 */
enum RlStatus rl_fit_sensitivities(const struct RlFit *fit,
                                   struct RlSensitivity *buf,
                                   size_t cap,
                                   size_t *len_out);

/**
 * # Safety
 * `fit` must be a live handle; `out` must be valid.
 */
enum RlStatus rl_fit_objective(const struct RlFit *fit,
                               struct RlObjective *out);

/**
 * # Safety
 * `fit` must be a live handle; `out` must be valid.
 */
enum RlStatus rl_fit_summary(const struct RlFit *fit,
                             struct RlFitSummary *out);

/**
 * Fit serialized as JSON, floats at 12 significant digits.
 *
 * # Safety
 * `fit` must be a live handle; `json_out` must be valid.
 */
enum RlStatus rl_fit_to_json(const struct RlFit *fit,
                             char **json_out);

/**
 * Trajectory table (`position,turn,label,G_hat,p_*,d_*`) as CSV.
 *
 * # Safety
 * `fit` must be a live handle; `csv_out` must be valid.
 */
enum RlStatus rl_fit_trajectory_csv(const struct RlFit *fit,
                                    char **csv_out);

/**
 * # Safety
 * `fit` must be NULL or a handle not yet freed.
 */
void rl_fit_free(struct RlFit *fit);

/**
 * Warm-started sweep over an ascending `grid`. Writes `n - 1` adjacent
 * RMSE values to `adj_rmse` and `n` calibration values to `mn_calibration`
 * (NaN where undefined), then the selected `λ` to `selected`. Returns
 * `RL_STATUS_CALIBRATION_UNAVAILABLE` after filling the arrays when the
 * corpus has no MN turns.
 *
 * # Safety
 * `corpus` must be a live handle; `grid` must hold `n` values,
 * `adj_rmse` `n - 1` and `mn_calibration` `n`; `config` and `selected`
 * must be valid.
 */
enum RlStatus rl_lambda_sweep(const struct RlCorpus *corpus,
                              const struct RlFitConfig *config,
                              const double *grid,
                              size_t n,
                              double *adj_rmse,
                              double *mn_calibration,
                              double *selected);

/**
 * Convenience for C callers that hold a path.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `corpus_out` must be valid.
 */
enum RlStatus rl_corpus_load_file(const char *path,
                                  struct RlCorpus **corpus_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGIMELAB_H */
