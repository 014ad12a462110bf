// evtail command-line tool. Talks to the library exclusively through the
// public C interface; everything here is argument plumbing and JSON
// assembly.
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evtail/evtail.h"

using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void bail(evt_status status) {
    int code = kExitNumeric;
    if (status == EVT_ERR_ARGUMENT) {
        code = kExitUsage;
    } else if (status == EVT_ERR_DATA) {
        code = kExitData;
    }
    throw CliError{code, evt_last_error()};
}

void require(evt_status status) {
    if (status != EVT_OK) {
        bail(status);
    }
}

// RAII wrappers over the opaque handles.
using DatasetPtr = std::unique_ptr<evt_dataset, decltype(&evt_dataset_destroy)>;
using ModelPtr = std::unique_ptr<evt_model, decltype(&evt_model_destroy)>;
using RegionPtr = std::unique_ptr<evt_region, decltype(&evt_region_destroy)>;
using ResultPtr = std::unique_ptr<evt_result, decltype(&evt_result_destroy)>;

DatasetPtr load_csv(const std::string& path, size_t expected_cols, bool missing_error) {
    evt_dataset* raw = nullptr;
    require(evt_dataset_read_csv(path.c_str(), expected_cols,
                                 missing_error ? EVT_MISSING_ERROR : EVT_MISSING_DROP_ROW,
                                 &raw));
    return {raw, &evt_dataset_destroy};
}

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw CliError{kExitData, "cannot open '" + path + "'"};
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

json parse_result(const ResultPtr& result) { return json::parse(evt_result_json(result.get())); }

void emit(const std::string& command, const json& config, const json& result,
          const std::string& out_path) {
    json doc;
    doc["meta"] = json{{"tool", "evtail"},
                       {"version", evt_version()},
                       {"command", command},
                       {"config", config}};
    doc["result"] = result;
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw CliError{kExitData, "cannot write '" + out_path + "'"};
        }
        file << text;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw CliError{kExitData, "cannot write '" + path + "'"};
    }
    file << text;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CliError{kExitUsage, "cannot parse '" + item + "' as a number"};
        }
    }
    if (out.empty()) {
        throw CliError{kExitUsage, "empty number list"};
    }
    return out;
}

size_t column_index(const evt_dataset* dataset, const std::string& wanted) {
    size_t rows = 0;
    size_t cols = 0;
    evt_dataset_dims(dataset, &rows, &cols);
    if (wanted.empty()) {
        return 0;
    }
    for (size_t i = 0; i < cols; ++i) {
        const char* name = evt_dataset_col_name(dataset, i);
        if (name && wanted == name) {
            return i;
        }
    }
    try {
        const size_t index = std::stoul(wanted);
        if (index < cols) {
            return index;
        }
    } catch (const std::exception&) {
    }
    throw CliError{kExitData, "no column named '" + wanted + "'"};
}

// Options shared by the pipeline subcommands.
struct PipelineCliOpts {
    std::string data_path;
    std::string estimator = "sparse";
    size_t k = 500;
    int n_clusters = 5;
    size_t n_cp = 50;
    std::uint64_t seed = 0;
    bool no_transform = false;
    double threshold_y = 6.0;
    double threshold_v = 7.0;
    double phi1 = 1.0 / 300.0;
    double phi2 = 12.0 / 300.0;
    size_t area1_count = 25;
    std::string missing = "drop-row";
    std::string out_path;

    bool missing_is_error() const {
        if (missing == "error") {
            return true;
        }
        if (missing != "drop-row") {
            throw CliError{kExitUsage, "unknown missing policy '" + missing + "'"};
        }
        return false;
    }

    evt_pipeline_opts to_c() const {
        evt_pipeline_opts opts = evt_pipeline_opts_default();
        if (estimator == "empirical") {
            opts.estimator = EVT_ESTIMATOR_EMPIRICAL;
        } else if (estimator == "sparse") {
            opts.estimator = EVT_ESTIMATOR_SPARSE;
        } else if (estimator == "cp") {
            opts.estimator = EVT_ESTIMATOR_CP;
        } else {
            throw CliError{kExitUsage, "unknown estimator '" + estimator + "'"};
        }
        opts.k = k;
        opts.n_clusters = n_clusters;
        opts.n_cp = n_cp;
        opts.seed = seed;
        opts.gumbel_input = no_transform ? 0 : 1;
        opts.threshold_y = threshold_y;
        opts.threshold_v = threshold_v;
        opts.phi1 = phi1;
        opts.phi2 = phi2;
        opts.area1_count = area1_count;
        return opts;
    }

    json echo() const {
        return json{{"data", data_path},       {"estimator", estimator},
                    {"k", k},                  {"K", n_clusters},
                    {"n_cp", n_cp},            {"seed", seed},
                    {"no_transform", no_transform}, {"threshold_y", threshold_y},
                    {"threshold_v", threshold_v},   {"phi1", phi1},
                    {"phi2", phi2},            {"area1_count", area1_count},
                    {"missing", missing}};
    }

    void attach(CLI::App* cmd, bool with_clusters) {
        cmd->add_option("--data", data_path, "input CSV file")->required();
        cmd->add_option("--estimator", estimator, "empirical, sparse or cp");
        cmd->add_option("--k", k, "number of extreme observations");
        if (with_clusters) {
            cmd->add_option("--K", n_clusters, "number of variable clusters");
            cmd->add_option("--n-cp", n_cp, "CP ensemble size per cluster");
            cmd->add_option("--phi1", phi1, "area-1 marginal exceedance probability");
            cmd->add_option("--phi2", phi2, "area-2 marginal exceedance probability");
            cmd->add_option("--area1-count", area1_count,
                            "number of leading variables in area 1");
        } else {
            cmd->add_option("--threshold-y", threshold_y, "Gumbel threshold for p1");
            cmd->add_option("--threshold-v", threshold_v, "Gumbel threshold for p2");
        }
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_flag("--no-transform", no_transform,
                      "data is already on Frechet margins");
        cmd->add_option("--missing", missing, "drop-row or error");
        cmd->add_option("--out", out_path, "write the JSON document here");
    }
};

int run(int argc, char** argv) {
    CLI::App app{"extreme value tail inference: peaks-over-threshold margins and "
                 "max-linear tail models"};
    app.require_subcommand(1);
    std::function<void()> action;

    // ---- loss ----
    auto* loss = app.add_subcommand("loss", "competition loss between quantiles");
    {
        auto q_true = std::make_shared<double>(0.0);
        auto q_hat = std::make_shared<double>(0.0);
        auto variant = std::make_shared<std::string>("as-printed");
        auto out = std::make_shared<std::string>();
        loss->add_option("--true", *q_true, "true quantile")->required();
        loss->add_option("--estimate", *q_hat, "estimated quantile")->required();
        loss->add_option("--variant", *variant, "as-printed or corrected");
        loss->add_option("--out", *out, "write the JSON document here");
        loss->callback([=] {
            int code = EVT_LOSS_AS_PRINTED;
            if (*variant == "corrected") {
                code = EVT_LOSS_CORRECTED;
            } else if (*variant != "as-printed") {
                throw CliError{kExitUsage, "unknown loss variant '" + *variant + "'"};
            }
            double value = 0.0;
            require(evt_challenge_loss(*q_true, *q_hat, code, &value));
            emit("loss",
                 json{{"true", *q_true}, {"estimate", *q_hat}, {"variant", *variant}},
                 json{{"loss", value}}, *out);
        });
    }

    // ---- return-level ----
    auto* rl = app.add_subcommand("return-level", "T-year return level from GPD parameters");
    {
        auto T = std::make_shared<double>(200.0);
        auto per_year = std::make_shared<double>(300.0);
        auto sigma = std::make_shared<double>(0.0);
        auto xi = std::make_shared<double>(0.0);
        auto u = std::make_shared<double>(0.0);
        auto zeta = std::make_shared<double>(0.0);
        auto out = std::make_shared<std::string>();
        rl->add_option("--T", *T, "return period in years")->required();
        rl->add_option("--per-year", *per_year, "observations per year")->required();
        rl->add_option("--sigma", *sigma, "GPD scale")->required();
        rl->add_option("--xi", *xi, "GPD shape")->required();
        rl->add_option("--threshold", *u, "threshold u")->required();
        rl->add_option("--zeta-u", *zeta, "threshold exceedance probability")->required();
        rl->add_option("--out", *out, "write the JSON document here");
        rl->callback([=] {
            double value = 0.0;
            require(evt_return_level(*T, *per_year, *sigma, *xi, *u, *zeta, &value));
            emit("return-level",
                 json{{"T", *T}, {"per_year", *per_year}, {"sigma", *sigma},
                      {"xi", *xi}, {"threshold", *u}, {"zeta_u", *zeta}},
                 json{{"return_level", value}}, *out);
        });
    }

    // ---- project ----
    auto* project = app.add_subcommand("project", "Euclidean projection onto the L1-simplex");
    {
        auto vector_text = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        project->add_option("--vector", *vector_text, "comma-separated components")
            ->required();
        project->add_option("--out", *out, "write the JSON document here");
        project->callback([=] {
            const auto v = parse_number_list(*vector_text);
            std::vector<double> w(v.size());
            require(evt_simplex_project(v.data(), v.size(), w.data()));
            emit("project", json{{"vector", v}}, json{{"projection", w}}, *out);
        });
    }

    // ---- fit-gpd ----
    auto* fit = app.add_subcommand("fit-gpd", "fit a GPD to threshold exceedances");
    {
        auto data_path = std::make_shared<std::string>();
        auto column = std::make_shared<std::string>();
        auto threshold = std::make_shared<double>(0.0);
        auto method = std::make_shared<std::string>("bayes");
        auto prior = std::make_shared<evt_gpd_prior>(evt_gpd_prior_default());
        auto config = std::make_shared<evt_mcmc_config>(evt_mcmc_config_default());
        auto T = std::make_shared<double>(0.0);
        auto per_year = std::make_shared<double>(300.0);
        auto study_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        fit->add_option("--data", *data_path, "input CSV file")->required();
        fit->add_option("--column", *column, "column name or index (default: first)");
        fit->add_option("--threshold", *threshold, "threshold u")->required();
        fit->add_option("--method", *method, "bayes or mle");
        fit->add_option("--prior-sigma-shape", prior->sigma_shape, "Gamma shape for sigma");
        fit->add_option("--prior-sigma-rate", prior->sigma_rate, "Gamma rate for sigma");
        fit->add_option("--prior-xi-mean", prior->xi_mean, "Normal mean for xi");
        fit->add_option("--prior-xi-sd", prior->xi_sd, "Normal sd for xi");
        fit->add_option("--iters", config->n_iter, "MCMC iterations");
        fit->add_option("--burn-in", config->burn_in, "MCMC burn-in");
        fit->add_option("--step-sigma", config->step_sigma, "proposal scale on log sigma");
        fit->add_option("--step-xi", config->step_xi, "proposal scale on xi");
        fit->add_option("--seed", config->seed, "random seed");
        fit->add_option("--T", *T, "also report the T-year return level");
        fit->add_option("--per-year", *per_year, "observations per year");
        fit->add_option("--bias-study", *study_path,
                        "bias-study JSON whose mean corrections are applied");
        fit->add_option("--out", *out, "write the JSON document here");
        fit->callback([=] {
            const auto dataset = load_csv(*data_path, 0, false);
            size_t rows = 0;
            require(evt_dataset_dims(dataset.get(), &rows, nullptr));
            if (rows == 0) {
                throw CliError{kExitData, "no rows in '" + *data_path + "'"};
            }
            const size_t col = column_index(dataset.get(), *column);
            std::vector<double> values(rows);
            require(evt_dataset_column(dataset.get(), col, values.data()));

            double zeta = 0.0;
            require(evt_exceedance_prob(values.data(), values.size(), *threshold, &zeta));
            std::vector<double> excesses;
            for (double y : values) {
                if (y > *threshold) {
                    excesses.push_back(y - *threshold);
                }
            }
            if (excesses.size() < 10) {
                throw CliError{kExitData, "fewer than 10 exceedances of the threshold"};
            }

            size_t dropped = 0;
            evt_dataset_dropped_rows(dataset.get(), &dropped);
            json result{{"threshold", *threshold},
                        {"zeta_u", zeta},
                        {"n_exceedances", excesses.size()},
                        {"n_observations", rows},
                        {"dropped_rows", dropped}};
            const json config_echo{
                {"data", *data_path},   {"column", *column}, {"threshold", *threshold},
                {"method", *method},    {"iters", config->n_iter},
                {"burn_in", config->burn_in}, {"seed", config->seed}};

            if (*method == "mle") {
                double sigma = 0.0;
                double xi = 0.0;
                double se_sigma = 0.0;
                double se_xi = 0.0;
                require(evt_fit_gpd_mle(excesses.data(), excesses.size(), &sigma, &xi,
                                        &se_sigma, &se_xi));
                result["mle"] = json{{"sigma", sigma},
                                     {"xi", xi},
                                     {"se_sigma", se_sigma},
                                     {"se_xi", se_xi}};
                if (*T > 0.0) {
                    double level = 0.0;
                    require(evt_return_level(*T, *per_year, sigma, xi, *threshold, zeta,
                                             &level));
                    result["return_level"] = level;
                }
            } else if (*method == "bayes") {
                evt_result* raw = nullptr;
                require(evt_fit_gpd_bayes(excesses.data(), excesses.size(), prior.get(),
                                          config.get(), &raw));
                ResultPtr posterior{raw, &evt_result_destroy};
                result["posterior"] = parse_result(posterior);
                if (*T > 0.0) {
                    ResultPtr study{nullptr, &evt_result_destroy};
                    if (study_path->empty()) {
                        evt_result* zero = nullptr;
                        require(evt_result_create(
                            R"({"residual_sigma":[],"residual_xi":[],)"
                            R"("mean_correction_sigma":0.0,"mean_correction_xi":0.0})",
                            &zero));
                        study.reset(zero);
                    } else {
                        evt_result* loaded = nullptr;
                        const std::string text = read_file(*study_path);
                        require(evt_result_create(text.c_str(), &loaded));
                        study.reset(loaded);
                        // stored documents carry the study under "result"
                        const json doc = json::parse(text);
                        if (doc.contains("result")) {
                            evt_result* inner = nullptr;
                            require(evt_result_create(doc["result"].dump().c_str(), &inner));
                            study.reset(inner);
                        }
                    }
                    evt_result* corrected = nullptr;
                    require(evt_apply_bias_correction(posterior.get(), study.get(),
                                                      *threshold, zeta, *T, *per_year,
                                                      &corrected));
                    ResultPtr holder{corrected, &evt_result_destroy};
                    result["return_levels"] = parse_result(holder);
                }
            } else {
                throw CliError{kExitUsage, "unknown method '" + *method + "'"};
            }
            emit("fit-gpd", config_echo, result, *out);
        });
    }

    // ---- bias-study ----
    auto* bias = app.add_subcommand("bias-study",
                                    "posterior-mean bias over simulated GPD samples");
    {
        auto n_sim = std::make_shared<int>(1000);
        auto n_points = std::make_shared<int>(180);
        auto sigma_lo = std::make_shared<double>(11.0);
        auto sigma_hi = std::make_shared<double>(18.0);
        auto xi_lo = std::make_shared<double>(-0.15);
        auto xi_hi = std::make_shared<double>(0.20);
        auto prior = std::make_shared<evt_gpd_prior>(evt_gpd_prior_default());
        auto config = std::make_shared<evt_mcmc_config>(evt_mcmc_config_default());
        auto out = std::make_shared<std::string>();
        bias->add_option("--n-sim", *n_sim, "number of simulated datasets");
        bias->add_option("--n-points", *n_points, "points per dataset");
        bias->add_option("--sigma-lo", *sigma_lo, "lower bound for the true scale");
        bias->add_option("--sigma-hi", *sigma_hi, "upper bound for the true scale");
        bias->add_option("--xi-lo", *xi_lo, "lower bound for the true shape");
        bias->add_option("--xi-hi", *xi_hi, "upper bound for the true shape");
        bias->add_option("--iters", config->n_iter, "MCMC iterations per refit");
        bias->add_option("--burn-in", config->burn_in, "MCMC burn-in");
        bias->add_option("--seed", config->seed, "random seed");
        bias->add_option("--out", *out, "write the JSON document here");
        bias->callback([=] {
            evt_result* raw = nullptr;
            require(evt_bias_study(*n_sim, *n_points, *sigma_lo, *sigma_hi, *xi_lo,
                                   *xi_hi, prior.get(), config.get(), &raw));
            ResultPtr study{raw, &evt_result_destroy};
            emit("bias-study",
                 json{{"n_sim", *n_sim}, {"n_points", *n_points},
                      {"sigma_range", {*sigma_lo, *sigma_hi}},
                      {"xi_range", {*xi_lo, *xi_hi}}, {"iters", config->n_iter},
                      {"burn_in", config->burn_in}, {"seed", config->seed}},
                 parse_result(study), *out);
        });
    }

    // ---- challenge3 ----
    auto* c3 = app.add_subcommand("challenge3",
                                  "trivariate tail probabilities via sparse projections");
    auto c3_opts = std::make_shared<PipelineCliOpts>();
    c3_opts->attach(c3, false);
    c3->callback([=] {
        const auto dataset = load_csv(c3_opts->data_path, 0, c3_opts->missing_is_error());
        const auto opts = c3_opts->to_c();
        evt_result* raw = nullptr;
        require(evt_challenge3(dataset.get(), &opts, &raw));
        ResultPtr result{raw, &evt_result_destroy};
        json body = parse_result(result);
        size_t dropped = 0;
        evt_dataset_dropped_rows(dataset.get(), &dropped);
        body["dropped_rows"] = dropped;
        emit("challenge3", c3_opts->echo(), body, c3_opts->out_path);
    });

    // ---- challenge4 ----
    auto* c4 = app.add_subcommand("challenge4",
                                  "high-dimensional joint exceedance via clustering");
    auto c4_opts = std::make_shared<PipelineCliOpts>();
    c4_opts->estimator = "cp";
    c4_opts->k = 250;
    c4_opts->attach(c4, true);
    c4->callback([=] {
        const auto dataset = load_csv(c4_opts->data_path, 0, c4_opts->missing_is_error());
        const auto opts = c4_opts->to_c();
        evt_result* raw = nullptr;
        require(evt_challenge4(dataset.get(), &opts, &raw));
        ResultPtr result{raw, &evt_result_destroy};
        json body = parse_result(result);
        size_t dropped = 0;
        evt_dataset_dropped_rows(dataset.get(), &dropped);
        body["dropped_rows"] = dropped;
        emit("challenge4", c4_opts->echo(), body, c4_opts->out_path);
    });

    // ---- sweep-k ----
    auto* sweep = app.add_subcommand("sweep-k", "rerun a challenge pipeline over k values");
    auto sweep_opts = std::make_shared<PipelineCliOpts>();
    {
        auto k_list = std::make_shared<std::string>();
        auto challenge = std::make_shared<int>(3);
        auto out_csv = std::make_shared<std::string>();
        sweep_opts->attach(sweep, true);
        sweep->add_option("--k-list", *k_list, "comma-separated k values")->required();
        sweep->add_option("--challenge", *challenge, "3 or 4");
        sweep->add_option("--out-csv", *out_csv, "also write rows as CSV");
        sweep->callback([=] {
            const auto dataset = load_csv(sweep_opts->data_path, 0, sweep_opts->missing_is_error());
            const auto opts = sweep_opts->to_c();
            std::vector<size_t> ks;
            for (double v : parse_number_list(*k_list)) {
                if (v < 1.0) {
                    throw CliError{kExitUsage, "k values must be positive"};
                }
                ks.push_back(static_cast<size_t>(v));
            }
            evt_result* raw = nullptr;
            require(evt_sweep_k(dataset.get(), &opts, ks.data(), ks.size(), *challenge,
                                &raw));
            ResultPtr result{raw, &evt_result_destroy};
            json body = parse_result(result);
            if (!out_csv->empty()) {
                write_text(*out_csv, body["csv"].get<std::string>());
            }
            json config = sweep_opts->echo();
            config["k_list"] = ks;
            config["challenge"] = *challenge;
            emit("sweep-k", config, body, sweep_opts->out_path);
        });
    }

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "draw samples from a max-linear model");
    {
        auto model_path = std::make_shared<std::string>();
        auto n = std::make_shared<size_t>(1000);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>();
        auto out_csv = std::make_shared<std::string>();
        simulate->add_option("--model-json", *model_path, "model JSON file")->required();
        simulate->add_option("--n", *n, "number of draws");
        simulate->add_option("--seed", *seed, "random seed");
        simulate->add_option("--out", *out, "write the JSON document here");
        simulate->add_option("--out-csv", *out_csv, "also write the sample as CSV");
        simulate->callback([=] {
            const std::string text = read_file(*model_path);
            evt_model* raw_model = nullptr;
            require(evt_model_from_json(text.c_str(), &raw_model));
            ModelPtr model{raw_model, &evt_model_destroy};
            evt_dataset* raw_sample = nullptr;
            require(evt_model_sample(model.get(), *n, *seed, &raw_sample));
            DatasetPtr sample{raw_sample, &evt_dataset_destroy};
            size_t rows = 0;
            size_t cols = 0;
            evt_dataset_dims(sample.get(), &rows, &cols);
            const double* cells = evt_dataset_data(sample.get());
            json rows_json = json::array();
            for (size_t t = 0; t < rows; ++t) {
                json row = json::array();
                for (size_t i = 0; i < cols; ++i) {
                    row.push_back(cells[t * cols + i]);
                }
                rows_json.push_back(std::move(row));
            }
            if (!out_csv->empty()) {
                std::ostringstream csv;
                for (size_t i = 0; i < cols; ++i) {
                    csv << (i ? "," : "") << evt_dataset_col_name(sample.get(), i);
                }
                csv << "\n";
                csv.precision(17);
                for (size_t t = 0; t < rows; ++t) {
                    for (size_t i = 0; i < cols; ++i) {
                        csv << (i ? "," : "") << cells[t * cols + i];
                    }
                    csv << "\n";
                }
                write_text(*out_csv, csv.str());
            }
            emit("simulate",
                 json{{"model", *model_path}, {"n", *n}, {"seed", *seed}},
                 json{{"n", rows}, {"d", cols}, {"sample", rows_json}}, *out);
        });
    }

    // ---- oracle ----
    auto* oracle = app.add_subcommand("oracle",
                                      "Monte Carlo estimate of a failure-region probability");
    {
        auto model_path = std::make_shared<std::string>();
        auto region_path = std::make_shared<std::string>();
        auto n_sim = std::make_shared<std::uint64_t>(10000000);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>();
        oracle->add_option("--model-json", *model_path, "model JSON file")->required();
        oracle->add_option("--region-json", *region_path, "region JSON file")->required();
        oracle->add_option("--n-sim", *n_sim, "number of simulated draws");
        oracle->add_option("--seed", *seed, "random seed");
        oracle->add_option("--out", *out, "write the JSON document here");
        oracle->callback([=] {
            evt_model* raw_model = nullptr;
            require(evt_model_from_json(read_file(*model_path).c_str(), &raw_model));
            ModelPtr model{raw_model, &evt_model_destroy};
            size_t d = 0;
            evt_model_dims(model.get(), &d, nullptr);
            evt_region* raw_region = nullptr;
            require(evt_region_from_json(read_file(*region_path).c_str(), d, &raw_region));
            RegionPtr region{raw_region, &evt_region_destroy};

            evt_result* raw_mc = nullptr;
            require(evt_mc_failure_prob(model.get(), region.get(), *n_sim, *seed, &raw_mc));
            ResultPtr mc{raw_mc, &evt_result_destroy};
            json body{{"monte_carlo", parse_result(mc)}};

            // the limit formula alongside, for side-by-side reporting
            double value = 0.0;
            double raw_value = 0.0;
            int clamped = 0;
            require(evt_failure_prob(model.get(), region.get(), 0.0, &value, &raw_value,
                                     &clamped));
            body["formula"] = json{{"value", value},
                                   {"raw", raw_value},
                                   {"clamped", clamped != 0}};
            emit("oracle",
                 json{{"model", *model_path}, {"region", *region_path},
                      {"n_sim", *n_sim}, {"seed", *seed}},
                 body, *out);
        });
    }

    // ---- cluster ----
    auto* cluster = app.add_subcommand("cluster",
                                       "F-madogram distances and PAM variable clustering");
    {
        auto data_path = std::make_shared<std::string>();
        auto n_clusters = std::make_shared<int>(5);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto sweep_max = std::make_shared<int>(0);
        auto out = std::make_shared<std::string>();
        auto out_csv = std::make_shared<std::string>();
        cluster->add_option("--data", *data_path, "input CSV file")->required();
        cluster->add_option("--K", *n_clusters, "number of clusters")->required();
        cluster->add_option("--seed", *seed, "random seed");
        cluster->add_option("--silhouette-sweep", *sweep_max,
                            "advisory silhouette scores for K = 2..this");
        cluster->add_option("--out", *out, "write the JSON document here");
        cluster->add_option("--out-csv", *out_csv, "also write the partition as CSV");
        cluster->callback([=] {
            const auto dataset = load_csv(*data_path, 0, false);
            evt_result* raw = nullptr;
            require(evt_cluster(dataset.get(), *n_clusters, *seed, *sweep_max, &raw));
            ResultPtr result{raw, &evt_result_destroy};
            json body = parse_result(result);
            if (!out_csv->empty()) {
                write_text(*out_csv, body["csv"].get<std::string>());
            }
            emit("cluster",
                 json{{"data", *data_path}, {"K", *n_clusters}, {"seed", *seed},
                      {"silhouette_sweep", *sweep_max}},
                 body, *out);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        app.exit(e);
        return kExitUsage;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CliError& e) {
        std::cerr << "evtail: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "evtail: " << e.what() << "\n";
        return kExitNumeric;
    }
}
