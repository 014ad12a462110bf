/* evtail: extreme-value tail inference library.
 *
 * C interface over the C++ core. All functions return evt_status; outputs
 * travel through out-pointers or opaque handles. Every handle returned
 * through an out-pointer is owned by the caller and must be released with
 * the matching *_destroy function. On failure the out-pointer is left
 * untouched and evt_last_error() describes what went wrong (thread-local).
 */
#ifndef EVTAIL_H
#define EVTAIL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evt_status {
    EVT_OK = 0,
    EVT_ERR_ARGUMENT = 1, /* invalid argument or precondition violation */
    EVT_ERR_DATA = 2,     /* file, CSV or JSON problems */
    EVT_ERR_NUMERIC = 3,  /* nonconvergence, infeasibility, exhausted retries */
    EVT_ERR_INTERNAL = 4
} evt_status;

const char* evt_version(void);
const char* evt_last_error(void);

/* ---------- opaque handles ---------- */

typedef struct evt_dataset evt_dataset; /* numeric table, row-major */
typedef struct evt_model evt_model;     /* max-linear model (A, alpha) */
typedef struct evt_region evt_region;   /* failure region (beta, u, l) */
typedef struct evt_result evt_result;   /* JSON document */

void evt_dataset_destroy(evt_dataset* dataset);
void evt_model_destroy(evt_model* model);
void evt_region_destroy(evt_region* region);
void evt_result_destroy(evt_result* result);

/* UTF-8 JSON text owned by the result handle. */
const char* evt_result_json(const evt_result* result);

/* Wraps existing JSON text (e.g. a saved result document) in a handle;
 * fails with EVT_ERR_DATA if the text does not parse. */
evt_status evt_result_create(const char* json_text, evt_result** out);

/* ---------- datasets ---------- */

typedef enum evt_missing_policy {
    EVT_MISSING_DROP_ROW = 0,
    EVT_MISSING_ERROR = 1
} evt_missing_policy;

/* Headered CSV of numeric cells. expected_cols = 0 accepts any width. */
evt_status evt_dataset_read_csv(const char* path, size_t expected_cols,
                                int missing_policy, evt_dataset** out);
evt_status evt_dataset_create(const double* row_major, size_t rows, size_t cols,
                              evt_dataset** out);
evt_status evt_dataset_dims(const evt_dataset* dataset, size_t* rows, size_t* cols);
/* Row-major cell block, valid while the dataset lives. */
const double* evt_dataset_data(const evt_dataset* dataset);
const char* evt_dataset_col_name(const evt_dataset* dataset, size_t col);
evt_status evt_dataset_dropped_rows(const evt_dataset* dataset, size_t* out);
/* Copies one column into out (length = number of rows). */
evt_status evt_dataset_column(const evt_dataset* dataset, size_t col, double* out);

/* ---------- marginal tail functions ---------- */

evt_status evt_gpd_survival(double y, double sigma, double xi, double u,
                            double zeta_u, double* out);
evt_status evt_gpd_quantile(double p, double sigma, double xi, double u,
                            double zeta_u, double* out);
evt_status evt_return_level(double T, double n_yr, double sigma, double xi,
                            double u, double zeta_u, double* out);
evt_status evt_exceedance_prob(const double* data, size_t n, double u, double* out);

typedef enum evt_loss_variant {
    EVT_LOSS_AS_PRINTED = 0,
    EVT_LOSS_CORRECTED = 1
} evt_loss_variant;

evt_status evt_challenge_loss(double q_true, double q_hat, int variant, double* out);
evt_status evt_gumbel_to_frechet(double y, double alpha, double* out);
evt_status evt_gumbel_quantile(double p, double* out);
evt_status evt_frechet_quantile(double p, double alpha, double* out);
/* Euclidean projection onto the L1-simplex; out has length d. */
evt_status evt_simplex_project(const double* v, size_t d, double* out);

/* ---------- GPD inference ---------- */

typedef struct evt_gpd_prior {
    double sigma_shape; /* Gamma prior on sigma */
    double sigma_rate;
    double xi_mean; /* Normal prior on xi */
    double xi_sd;
} evt_gpd_prior;

typedef struct evt_mcmc_config {
    int n_iter;
    int burn_in;
    double step_sigma; /* random-walk scale on log(sigma) */
    double step_xi;
    uint64_t seed;
} evt_mcmc_config;

evt_gpd_prior evt_gpd_prior_default(void);   /* Gamma(4,1), Normal(0,1) */
evt_mcmc_config evt_mcmc_config_default(void);

/* Maximum likelihood with standard errors (NaN when the information matrix
 * is singular). Any out-pointer may be NULL to skip that value. */
evt_status evt_fit_gpd_mle(const double* excesses, size_t n, double* sigma,
                           double* xi, double* se_sigma, double* se_xi);

/* Posterior samples plus summary moments as JSON. */
evt_status evt_fit_gpd_bayes(const double* excesses, size_t n,
                             const evt_gpd_prior* prior,
                             const evt_mcmc_config* config, evt_result** out);

evt_status evt_jackknife_quantile_ci(const double* excesses, size_t n, double p,
                                     double u, double zeta_u, double* q25,
                                     double* q75);

/* Simulation study of posterior-mean bias: residual arrays and the mean
 * corrections as JSON. */
evt_status evt_bias_study(int n_sim, int n_points, double sigma_lo, double sigma_hi,
                          double xi_lo, double xi_hi, const evt_gpd_prior* prior,
                          const evt_mcmc_config* config, evt_result** out);

/* fit = evt_fit_gpd_bayes output, study = evt_bias_study output. Evaluates
 * the T-year return level per posterior draw before and after adding the
 * mean corrections; emits both lists and their means as JSON. */
evt_status evt_apply_bias_correction(const evt_result* fit, const evt_result* study,
                                     double u, double zeta_u, double T, double n_yr,
                                     evt_result** out);

/* ---------- max-linear models ---------- */

evt_status evt_model_create(const double* row_major, size_t d, size_t q,
                            double alpha, evt_model** out);
/* {"alpha": a, "A": [[row], ...]} */
evt_status evt_model_from_json(const char* json_text, evt_model** out);
evt_status evt_model_dims(const evt_model* model, size_t* d, size_t* q);
evt_status evt_model_to_result(const evt_model* model, evt_result** out);
/* n x d sample on Frechet margins as a dataset handle. */
evt_status evt_model_sample(const evt_model* model, size_t n, uint64_t seed,
                            evt_dataset** out);

/* {"beta": [1-based indices], "u": [...], "l": [...] | null}. d may be 0 if
 * the JSON carries a "d" field. */
evt_status evt_region_from_json(const char* json_text, size_t d, evt_region** out);

/* Limit-formula probability that the model falls in the region. raw and
 * clamped may be NULL; value is raw clamped to [0, 1]. */
evt_status evt_failure_prob(const evt_model* model, const evt_region* region,
                            double zero_tol, double* value, double* raw,
                            int* clamped);
/* Angular-mass bound, alpha = 1 and scalar threshold only. */
evt_status evt_failure_prob_upper_bound(const evt_model* model,
                                        const evt_region* region, double* out);

/* ---------- Monte Carlo oracle ---------- */

evt_status evt_mc_failure_prob(const evt_model* model, const evt_region* region,
                               uint64_t n_sim, uint64_t seed, evt_result** out);
evt_status evt_empirical_region_prob(const evt_dataset* dataset,
                                     const evt_region* region, evt_result** out);

/* ---------- pipelines ---------- */

typedef enum evt_estimator {
    EVT_ESTIMATOR_EMPIRICAL = 0,
    EVT_ESTIMATOR_SPARSE = 1,
    EVT_ESTIMATOR_CP = 2
} evt_estimator;

typedef struct evt_pipeline_opts {
    int estimator; /* evt_estimator */
    size_t k;      /* number of extreme observations */
    int n_clusters;
    size_t n_cp;
    uint64_t seed;
    int gumbel_input; /* nonzero: margins arrive on the Gumbel scale */
    double threshold_y;
    double threshold_v;
    double phi1;
    double phi2;
    size_t area1_count;
} evt_pipeline_opts;

evt_pipeline_opts evt_pipeline_opts_default(void);

evt_status evt_challenge3(const evt_dataset* dataset, const evt_pipeline_opts* opts,
                          evt_result** out);
evt_status evt_challenge4(const evt_dataset* dataset, const evt_pipeline_opts* opts,
                          evt_result** out);
/* Reruns the challenge pipeline per k; the result JSON carries the rows, a
 * small-k variability diagnostic and a ready-to-write "csv" field. */
evt_status evt_sweep_k(const evt_dataset* dataset, const evt_pipeline_opts* opts,
                       const size_t* k_values, size_t n_k, int challenge,
                       evt_result** out);

/* F-madogram distances + PAM partition; JSON includes the partition, block
 * validation, silhouette, a "csv" export and optionally a silhouette sweep
 * over 2..max_sweep_clusters (0 disables). */
evt_status evt_cluster(const evt_dataset* dataset, int n_clusters, uint64_t seed,
                       int max_sweep_clusters, evt_result** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EVTAIL_H */
