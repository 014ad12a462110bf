#include "core/json_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/error.hpp"

namespace evt {

Json matrix_to_json(const Matrix& m) {
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const Json& j) {
    try {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        auto data = j.at("data").get<std::vector<double>>();
        return Matrix(rows, cols, std::move(data));
    } catch (const Json::exception& e) {
        throw DataError(std::string("matrix json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("matrix json: ") + e.what());
    }
}

Json model_to_json(const MaxLinearModel& model) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const auto row = model.A.row(i);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return Json{{"alpha", model.alpha}, {"A", rows}};
}

MaxLinearModel model_from_json(const Json& j) {
    try {
        MaxLinearModel model;
        model.alpha = j.at("alpha").get<double>();
        const auto& rows = j.at("A");
        if (!rows.is_array() || rows.empty()) {
            throw DataError("model json: 'A' must be a nonempty array of rows");
        }
        const std::size_t d = rows.size();
        const std::size_t q = rows.front().size();
        model.A = Matrix(d, q);
        for (std::size_t i = 0; i < d; ++i) {
            const auto row = rows[i].get<std::vector<double>>();
            if (row.size() != q) {
                throw DataError("model json: ragged rows in 'A'");
            }
            for (std::size_t k = 0; k < q; ++k) {
                model.A(i, k) = row[k];
            }
        }
        model.validate_strict();
        return model;
    } catch (const Json::exception& e) {
        throw DataError(std::string("model json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model json: ") + e.what());
    }
}

Json region_to_json(const FailureRegion& region, std::size_t d) {
    Json beta = Json::array();
    for (std::size_t i : region.beta) {
        beta.push_back(i + 1);
    }
    Json j{{"beta", beta}, {"u", region.u}};
    if (region.l.empty()) {
        j["l"] = nullptr;
    } else {
        Json caps = Json::array();
        for (double cap : region.l) {
            if (std::isfinite(cap)) {
                caps.push_back(cap);
            } else {
                caps.push_back(nullptr);
            }
        }
        j["l"] = caps;
    }
    j["d"] = d;
    return j;
}

FailureRegion region_from_json(const Json& j, std::size_t d) {
    try {
        FailureRegion region;
        if (d == 0 && j.contains("d")) {
            d = j.at("d").get<std::size_t>();
        }
        for (const auto& idx : j.at("beta")) {
            const auto one_based = idx.get<std::size_t>();
            if (one_based < 1) {
                throw DataError("region json: beta indices are 1-based");
            }
            region.beta.push_back(one_based - 1);
        }
        region.u = j.at("u").get<std::vector<double>>();
        if (j.contains("l") && !j.at("l").is_null()) {
            for (const auto& cap : j.at("l")) {
                region.l.push_back(cap.is_null()
                                       ? std::numeric_limits<double>::infinity()
                                       : cap.get<double>());
            }
        }
        region.validate(d);
        return region;
    } catch (const Json::exception& e) {
        throw DataError(std::string("region json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("region json: ") + e.what());
    }
}

Json mc_estimate_to_json(const McEstimate& est) {
    return Json{{"p_hat", est.p_hat},
                {"n_sim", est.n_sim},
                {"std_err", est.std_err},
                {"seed", est.seed},
                {"n_hits", est.n_hits}};
}

Json posterior_to_json(const PosteriorSamples& samples) {
    double mean_sigma = 0.0;
    double mean_xi = 0.0;
    for (std::size_t i = 0; i < samples.sigma.size(); ++i) {
        mean_sigma += samples.sigma[i];
        mean_xi += samples.xi[i];
    }
    const auto n = static_cast<double>(samples.sigma.size());
    mean_sigma /= n;
    mean_xi /= n;
    double var_sigma = 0.0;
    double var_xi = 0.0;
    for (std::size_t i = 0; i < samples.sigma.size(); ++i) {
        var_sigma += (samples.sigma[i] - mean_sigma) * (samples.sigma[i] - mean_sigma);
        var_xi += (samples.xi[i] - mean_xi) * (samples.xi[i] - mean_xi);
    }
    var_sigma /= n;
    var_xi /= n;
    return Json{{"sigma", samples.sigma},
                {"xi", samples.xi},
                {"acceptance_rate", samples.acceptance_rate},
                {"mean_sigma", mean_sigma},
                {"mean_xi", mean_xi},
                {"sd_sigma", std::sqrt(var_sigma)},
                {"sd_xi", std::sqrt(var_xi)}};
}

Json bias_study_to_json(const BiasStudyResult& study) {
    return Json{{"residual_sigma", study.residual_sigma},
                {"residual_xi", study.residual_xi},
                {"mean_correction_sigma", study.mean_correction_sigma},
                {"mean_correction_xi", study.mean_correction_xi},
                {"n_failed", study.n_failed}};
}

BiasStudyResult bias_study_from_json(const Json& j) {
    try {
        BiasStudyResult study;
        study.residual_sigma = j.at("residual_sigma").get<std::vector<double>>();
        study.residual_xi = j.at("residual_xi").get<std::vector<double>>();
        study.mean_correction_sigma = j.at("mean_correction_sigma").get<double>();
        study.mean_correction_xi = j.at("mean_correction_xi").get<double>();
        study.n_failed = j.value("n_failed", 0);
        return study;
    } catch (const Json::exception& e) {
        throw DataError(std::string("bias study json: ") + e.what());
    }
}

Json partition_to_json(const ClusterPartition& partition) {
    Json labels = Json::array();
    for (int lab : partition.labels) {
        labels.push_back(lab + 1);
    }
    Json medoids = Json::array();
    for (std::size_t m : partition.medoids) {
        medoids.push_back(m + 1);
    }
    return Json{{"K", partition.n_clusters}, {"labels", labels}, {"medoids", medoids}};
}

std::string partition_to_csv(const ClusterPartition& partition) {
    std::ostringstream out;
    out << "variable,cluster\n";
    for (std::size_t i = 0; i < partition.labels.size(); ++i) {
        out << (i + 1) << ',' << (partition.labels[i] + 1) << '\n';
    }
    return out.str();
}

} // namespace evt
