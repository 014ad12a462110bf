#include "evtail/evtail.h"

#include <cstring>
#include <string>
#include <vector>

#include "core/clustering.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/gpd.hpp"
#include "core/json_io.hpp"
#include "core/margins.hpp"
#include "core/max_linear.hpp"
#include "core/oracle.hpp"
#include "core/pipeline.hpp"
#include "core/tpdm.hpp"
#include "core/version.hpp"

struct evt_dataset {
    evt::Matrix values;
    std::vector<std::string> column_names;
    size_t n_dropped = 0;
};

struct evt_model {
    evt::MaxLinearModel impl;
};

struct evt_region {
    evt::FailureRegion impl;
    size_t dim = 0;
};

struct evt_result {
    std::string json;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* message) { g_last_error = message ? message : ""; }

evt_status fail(evt_status code, const char* message) {
    set_error(message);
    return code;
}

// Runs fn, translating exceptions to status codes.
template <typename Fn>
evt_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return EVT_OK;
    } catch (const evt::DataError& e) {
        return fail(EVT_ERR_DATA, e.what());
    } catch (const evt::NumericError& e) {
        return fail(EVT_ERR_NUMERIC, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(EVT_ERR_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(EVT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(EVT_ERR_INTERNAL, "unknown error");
    }
}

evt_result* make_result(const evt::Json& j) { return new evt_result{j.dump()}; }

bool null_args(std::initializer_list<const void*> ptrs) {
    for (const void* p : ptrs) {
        if (p == nullptr) {
            return true;
        }
    }
    return false;
}

evt::PipelineConfig to_config(const evt_pipeline_opts& opts) {
    evt::PipelineConfig config;
    switch (opts.estimator) {
        case EVT_ESTIMATOR_EMPIRICAL: config.estimator = evt::Estimator::Empirical; break;
        case EVT_ESTIMATOR_SPARSE: config.estimator = evt::Estimator::Sparse; break;
        case EVT_ESTIMATOR_CP: config.estimator = evt::Estimator::Cp; break;
        default: throw std::invalid_argument("unknown estimator code");
    }
    config.k = opts.k;
    config.n_clusters = opts.n_clusters;
    config.n_cp = opts.n_cp;
    config.seed = opts.seed;
    config.gumbel_input = opts.gumbel_input != 0;
    config.threshold_y = opts.threshold_y;
    config.threshold_v = opts.threshold_v;
    config.phi1 = opts.phi1;
    config.phi2 = opts.phi2;
    config.area1_count = opts.area1_count;
    return config;
}

} // namespace

extern "C" {

const char* evt_version(void) { return evt::kVersion; }

const char* evt_last_error(void) { return g_last_error.c_str(); }

void evt_dataset_destroy(evt_dataset* dataset) { delete dataset; }
void evt_model_destroy(evt_model* model) { delete model; }
void evt_region_destroy(evt_region* region) { delete region; }
void evt_result_destroy(evt_result* result) { delete result; }

const char* evt_result_json(const evt_result* result) {
    return result ? result->json.c_str() : nullptr;
}

evt_status evt_result_create(const char* json_text, evt_result** out) {
    if (null_args({json_text, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        try {
            *out = make_result(evt::Json::parse(json_text));
        } catch (const evt::Json::exception& e) {
            throw evt::DataError(std::string("result json: ") + e.what());
        }
    });
}

evt_status evt_dataset_read_csv(const char* path, size_t expected_cols,
                                int missing_policy, evt_dataset** out) {
    if (null_args({path, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto policy = missing_policy == EVT_MISSING_ERROR
                                ? evt::MissingPolicy::Error
                                : evt::MissingPolicy::DropRow;
        auto table = evt::read_csv(path, expected_cols, policy);
        *out = new evt_dataset{std::move(table.values), std::move(table.column_names),
                               table.n_dropped};
    });
}

evt_status evt_dataset_create(const double* row_major, size_t rows, size_t cols,
                              evt_dataset** out) {
    if (null_args({row_major, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        std::vector<double> data(row_major, row_major + rows * cols);
        std::vector<std::string> names;
        for (size_t i = 0; i < cols; ++i) {
            names.push_back("V" + std::to_string(i + 1));
        }
        *out = new evt_dataset{evt::Matrix(rows, cols, std::move(data)),
                               std::move(names), 0};
    });
}

evt_status evt_dataset_dims(const evt_dataset* dataset, size_t* rows, size_t* cols) {
    if (null_args({dataset})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    if (rows) {
        *rows = dataset->values.rows();
    }
    if (cols) {
        *cols = dataset->values.cols();
    }
    return EVT_OK;
}

const double* evt_dataset_data(const evt_dataset* dataset) {
    return dataset ? dataset->values.data().data() : nullptr;
}

const char* evt_dataset_col_name(const evt_dataset* dataset, size_t col) {
    if (!dataset || col >= dataset->column_names.size()) {
        return nullptr;
    }
    return dataset->column_names[col].c_str();
}

evt_status evt_dataset_dropped_rows(const evt_dataset* dataset, size_t* out) {
    if (null_args({dataset, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    *out = dataset->n_dropped;
    return EVT_OK;
}

evt_status evt_dataset_column(const evt_dataset* dataset, size_t col, double* out) {
    if (null_args({dataset, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    if (col >= dataset->values.cols()) {
        return fail(EVT_ERR_ARGUMENT, "column index out of range");
    }
    for (size_t t = 0; t < dataset->values.rows(); ++t) {
        out[t] = dataset->values(t, col);
    }
    return EVT_OK;
}

evt_status evt_gpd_survival(double y, double sigma, double xi, double u,
                            double zeta_u, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::gpd_survival(y, {sigma, xi, u, zeta_u}); });
}

evt_status evt_gpd_quantile(double p, double sigma, double xi, double u,
                            double zeta_u, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::gpd_quantile(p, {sigma, xi, u, zeta_u}); });
}

evt_status evt_return_level(double T, double n_yr, double sigma, double xi,
                            double u, double zeta_u, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::return_level(T, n_yr, {sigma, xi, u, zeta_u}); });
}

evt_status evt_exceedance_prob(const double* data, size_t n, double u, double* out) {
    if (null_args({data, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::exceedance_prob({data, n}, u); });
}

evt_status evt_challenge_loss(double q_true, double q_hat, int variant, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto v = variant == EVT_LOSS_CORRECTED ? evt::LossVariant::Corrected
                                                     : evt::LossVariant::AsPrinted;
        *out = evt::challenge_loss(q_true, q_hat, v);
    });
}

evt_status evt_gumbel_to_frechet(double y, double alpha, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::gumbel_to_frechet(y, alpha); });
}

evt_status evt_gumbel_quantile(double p, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::gumbel_quantile(p); });
}

evt_status evt_frechet_quantile(double p, double alpha, double* out) {
    if (null_args({out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = evt::frechet_quantile(p, alpha); });
}

evt_status evt_simplex_project(const double* v, size_t d, double* out) {
    if (null_args({v, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto w = evt::simplex_project({v, d});
        std::memcpy(out, w.data(), d * sizeof(double));
    });
}

evt_gpd_prior evt_gpd_prior_default(void) {
    const evt::GpdPrior p;
    return {p.sigma_shape, p.sigma_rate, p.xi_mean, p.xi_sd};
}

evt_mcmc_config evt_mcmc_config_default(void) {
    const evt::McmcConfig c;
    return {c.n_iter, c.burn_in, c.step_sigma, c.step_xi, c.seed};
}

evt_status evt_fit_gpd_mle(const double* excesses, size_t n, double* sigma,
                           double* xi, double* se_sigma, double* se_xi) {
    if (null_args({excesses})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto fit = evt::fit_gpd_mle({excesses, n});
        if (sigma) {
            *sigma = fit.sigma;
        }
        if (xi) {
            *xi = fit.xi;
        }
        if (se_sigma) {
            *se_sigma = fit.se_sigma;
        }
        if (se_xi) {
            *se_xi = fit.se_xi;
        }
    });
}

evt_status evt_fit_gpd_bayes(const double* excesses, size_t n,
                             const evt_gpd_prior* prior,
                             const evt_mcmc_config* config, evt_result** out) {
    if (null_args({excesses, prior, config, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const evt::GpdPrior p{prior->sigma_shape, prior->sigma_rate, prior->xi_mean,
                              prior->xi_sd};
        const evt::McmcConfig c{config->n_iter, config->burn_in, config->step_sigma,
                                config->step_xi, config->seed};
        const auto samples = evt::fit_gpd_bayes({excesses, n}, p, c);
        *out = make_result(evt::posterior_to_json(samples));
    });
}

evt_status evt_jackknife_quantile_ci(const double* excesses, size_t n, double p,
                                     double u, double zeta_u, double* q25,
                                     double* q75) {
    if (null_args({excesses, q25, q75})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto [lo, hi] = evt::jackknife_quantile_ci({excesses, n}, p, u, zeta_u);
        *q25 = lo;
        *q75 = hi;
    });
}

evt_status evt_bias_study(int n_sim, int n_points, double sigma_lo, double sigma_hi,
                          double xi_lo, double xi_hi, const evt_gpd_prior* prior,
                          const evt_mcmc_config* config, evt_result** out) {
    if (null_args({prior, config, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const evt::GpdPrior p{prior->sigma_shape, prior->sigma_rate, prior->xi_mean,
                              prior->xi_sd};
        const evt::McmcConfig c{config->n_iter, config->burn_in, config->step_sigma,
                                config->step_xi, config->seed};
        const auto study = evt::run_bias_study(n_sim, n_points, {sigma_lo, sigma_hi},
                                               {xi_lo, xi_hi}, p, c);
        auto j = evt::bias_study_to_json(study);
        j["n_sim"] = n_sim;
        j["n_points"] = n_points;
        *out = make_result(j);
    });
}

evt_status evt_apply_bias_correction(const evt_result* fit, const evt_result* study,
                                     double u, double zeta_u, double T, double n_yr,
                                     evt_result** out) {
    if (null_args({fit, study, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto fit_json = evt::Json::parse(fit->json);
        evt::PosteriorSamples samples;
        samples.sigma = fit_json.at("sigma").get<std::vector<double>>();
        samples.xi = fit_json.at("xi").get<std::vector<double>>();
        const auto study_result = evt::bias_study_from_json(evt::Json::parse(study->json));
        const auto corrected =
            evt::apply_bias_correction(samples, study_result, u, zeta_u, T, n_yr);
        auto mean = [](const std::vector<double>& xs) {
            double s = 0.0;
            for (double x : xs) {
                s += x;
            }
            return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
        };
        *out = make_result(evt::Json{{"return_levels_raw", corrected.raw},
                                     {"return_levels_shifted", corrected.shifted},
                                     {"mean_raw", mean(corrected.raw)},
                                     {"mean_shifted", mean(corrected.shifted)},
                                     {"n_skipped", corrected.n_skipped}});
    });
}

evt_status evt_model_create(const double* row_major, size_t d, size_t q,
                            double alpha, evt_model** out) {
    if (null_args({row_major, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        evt::MaxLinearModel model;
        model.alpha = alpha;
        model.A = evt::Matrix(d, q, std::vector<double>(row_major, row_major + d * q));
        model.validate_strict();
        *out = new evt_model{std::move(model)};
    });
}

evt_status evt_model_from_json(const char* json_text, evt_model** out) {
    if (null_args({json_text, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        evt::Json j;
        try {
            j = evt::Json::parse(json_text);
        } catch (const evt::Json::exception& e) {
            throw evt::DataError(std::string("model json: ") + e.what());
        }
        *out = new evt_model{evt::model_from_json(j)};
    });
}

evt_status evt_model_dims(const evt_model* model, size_t* d, size_t* q) {
    if (null_args({model})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    if (d) {
        *d = model->impl.dim();
    }
    if (q) {
        *q = model->impl.n_cols();
    }
    return EVT_OK;
}

evt_status evt_model_to_result(const evt_model* model, evt_result** out) {
    if (null_args({model, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] { *out = make_result(evt::model_to_json(model->impl)); });
}

evt_status evt_model_sample(const evt_model* model, size_t n, uint64_t seed,
                            evt_dataset** out) {
    if (null_args({model, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        auto sample = evt::sample_max_linear(model->impl, n, seed);
        std::vector<std::string> names;
        for (size_t i = 0; i < sample.cols(); ++i) {
            names.push_back("X" + std::to_string(i + 1));
        }
        *out = new evt_dataset{std::move(sample), std::move(names), 0};
    });
}

evt_status evt_region_from_json(const char* json_text, size_t d, evt_region** out) {
    if (null_args({json_text, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        evt::Json j;
        try {
            j = evt::Json::parse(json_text);
        } catch (const evt::Json::exception& e) {
            throw evt::DataError(std::string("region json: ") + e.what());
        }
        auto region = evt::region_from_json(j, d);
        size_t dim = d;
        if (dim == 0) {
            dim = j.at("d").get<size_t>();
        }
        *out = new evt_region{std::move(region), dim};
    });
}

evt_status evt_failure_prob(const evt_model* model, const evt_region* region,
                            double zero_tol, double* value, double* raw,
                            int* clamped) {
    if (null_args({model, region, value})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto p = evt::failure_prob_approx(model->impl, region->impl, zero_tol);
        *value = p.value;
        if (raw) {
            *raw = p.raw;
        }
        if (clamped) {
            *clamped = p.clamped ? 1 : 0;
        }
    });
}

evt_status evt_failure_prob_upper_bound(const evt_model* model,
                                        const evt_region* region, double* out) {
    if (null_args({model, region, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        *out = evt::failure_prob_upper_bound(model->impl, region->impl);
    });
}

evt_status evt_mc_failure_prob(const evt_model* model, const evt_region* region,
                               uint64_t n_sim, uint64_t seed, evt_result** out) {
    if (null_args({model, region, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto est = evt::mc_failure_prob(model->impl, region->impl, n_sim, seed);
        *out = make_result(evt::mc_estimate_to_json(est));
    });
}

evt_status evt_empirical_region_prob(const evt_dataset* dataset,
                                     const evt_region* region, evt_result** out) {
    if (null_args({dataset, region, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto est = evt::empirical_region_prob(dataset->values, region->impl);
        *out = make_result(evt::mc_estimate_to_json(est));
    });
}

evt_pipeline_opts evt_pipeline_opts_default(void) {
    const evt::PipelineConfig c;
    evt_pipeline_opts opts;
    opts.estimator = EVT_ESTIMATOR_SPARSE;
    opts.k = c.k;
    opts.n_clusters = c.n_clusters;
    opts.n_cp = c.n_cp;
    opts.seed = c.seed;
    opts.gumbel_input = c.gumbel_input ? 1 : 0;
    opts.threshold_y = c.threshold_y;
    opts.threshold_v = c.threshold_v;
    opts.phi1 = c.phi1;
    opts.phi2 = c.phi2;
    opts.area1_count = c.area1_count;
    return opts;
}

evt_status evt_challenge3(const evt_dataset* dataset, const evt_pipeline_opts* opts,
                          evt_result** out) {
    if (null_args({dataset, opts, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto result = evt::run_challenge3(dataset->values, to_config(*opts));
        *out = make_result(evt::challenge_result_to_json(result));
    });
}

evt_status evt_challenge4(const evt_dataset* dataset, const evt_pipeline_opts* opts,
                          evt_result** out) {
    if (null_args({dataset, opts, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto result = evt::run_challenge4(dataset->values, to_config(*opts));
        *out = make_result(evt::challenge_result_to_json(result));
    });
}

evt_status evt_sweep_k(const evt_dataset* dataset, const evt_pipeline_opts* opts,
                       const size_t* k_values, size_t n_k, int challenge,
                       evt_result** out) {
    if (null_args({dataset, opts, k_values, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto sweep = evt::k_sensitivity_sweep(dataset->values, to_config(*opts),
                                                    {k_values, n_k}, challenge);
        auto j = evt::sweep_result_to_json(sweep);
        j["csv"] = evt::sweep_result_to_csv(sweep);
        *out = make_result(j);
    });
}

evt_status evt_cluster(const evt_dataset* dataset, int n_clusters, uint64_t seed,
                       int max_sweep_clusters, evt_result** out) {
    if (null_args({dataset, out})) {
        return fail(EVT_ERR_ARGUMENT, "null pointer argument");
    }
    return guarded([&] {
        const auto dist = evt::fmadogram_matrix(dataset->values);
        const auto partition = evt::pam_cluster(dist, n_clusters, seed);
        evt::Json j;
        j["partition"] = evt::partition_to_json(partition);
        j["csv"] = evt::partition_to_csv(partition);
        j["distance_matrix"] = evt::matrix_to_json(dist.d);
        j["silhouette"] = evt::silhouette_score(dist, partition);
        if (n_clusters >= 2) {
            const auto report = evt::validate_blocks(dist, partition);
            j["block_validation"] = evt::Json{{"max_within", report.max_within},
                                              {"min_between", report.min_between},
                                              {"consistent", report.consistent}};
        }
        if (max_sweep_clusters >= 2) {
            evt::Json sweep = evt::Json::array();
            const int hi = std::min<int>(max_sweep_clusters,
                                         static_cast<int>(dist.size()));
            for (int kk = 2; kk <= hi; ++kk) {
                const auto part = evt::pam_cluster(dist, kk, seed);
                sweep.push_back(evt::Json{{"K", kk},
                                          {"silhouette", evt::silhouette_score(dist, part)}});
            }
            j["silhouette_sweep"] = sweep;
        }
        *out = make_result(j);
    });
}

} // extern "C"
