#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "core/error.hpp"
#include "core/margins.hpp"
#include "core/rng.hpp"

namespace evt {

namespace {

Matrix transform_margins(const Matrix& data, double alpha, bool gumbel_input) {
    if (!gumbel_input) {
        return data;
    }
    Matrix out(data.rows(), data.cols());
    for (std::size_t t = 0; t < data.rows(); ++t) {
        for (std::size_t i = 0; i < data.cols(); ++i) {
            out(t, i) = gumbel_to_frechet(data(t, i), alpha);
        }
    }
    return out;
}

std::vector<std::size_t> column_support(const MaxLinearModel& model, std::size_t j) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        if (model.A(i, j) > 0.0) {
            support.push_back(i);
        }
    }
    return support;
}

std::string support_key(const std::vector<std::size_t>& support) {
    std::string key;
    for (std::size_t i : support) {
        if (!key.empty()) {
            key += ',';
        }
        key += std::to_string(i + 1);
    }
    return key;
}

void fill_projection_diagnostics(const MaxLinearModel& model, ChallengeResult& result) {
    const std::size_t d = model.dim();
    for (std::size_t j = 0; j < model.n_cols(); ++j) {
        const auto support = column_support(model, j);
        if (support.size() == d) {
            ++result.n_interior;
        } else if (support.size() == 1) {
            ++result.n_vertex;
        } else {
            ++result.n_edge;
        }
        if (d <= 10) {
            ++result.support_counts[support_key(support)];
        }
    }
    result.n_compressed = compress_columns(model).n_cols();
}

// Distinct (value, count) pairs over an ensemble of per-factor estimates.
std::vector<DistributionPoint> tally_distinct(const std::vector<double>& values) {
    std::map<double, std::uint64_t> counts;
    for (double v : values) {
        ++counts[v];
    }
    std::vector<DistributionPoint> out;
    out.reserve(counts.size());
    for (const auto& [value, count] : counts) {
        out.push_back({value, count});
    }
    return out;
}

double variance_of(const std::vector<double>& xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    return var / static_cast<double>(xs.size() - 1);
}

} // namespace

std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::Empirical: return "empirical";
        case Estimator::Sparse: return "sparse";
        case Estimator::Cp: return "cp";
    }
    return "unknown";
}

Estimator estimator_from_name(const std::string& name) {
    if (name == "empirical") {
        return Estimator::Empirical;
    }
    if (name == "sparse") {
        return Estimator::Sparse;
    }
    if (name == "cp") {
        return Estimator::Cp;
    }
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

ChallengeResult run_challenge3(const Matrix& data, const PipelineConfig& config) {
    if (config.estimator != Estimator::Sparse) {
        throw std::invalid_argument("run_challenge3: requires the sparse estimator (alpha = 1)");
    }
    ChallengeResult result;
    Matrix working = data;
    if (data.cols() > 3) {
        result.notes.push_back("ignoring " + std::to_string(data.cols() - 3) +
                               " extra columns (covariates are not used)");
        Matrix trimmed(data.rows(), 3);
        for (std::size_t t = 0; t < data.rows(); ++t) {
            for (std::size_t i = 0; i < 3; ++i) {
                trimmed(t, i) = data(t, i);
            }
        }
        working = std::move(trimmed);
    }
    if (working.cols() != 3) {
        throw DataError("run_challenge3: need 3 data columns, found " +
                        std::to_string(working.cols()));
    }

    const Matrix frechet = transform_margins(working, 1.0, config.gumbel_input);
    const PolarSample polar = polar_decompose(frechet, 1.0);
    const MaxLinearModel estimate = sparse_empirical_A(polar, config.k);
    result.radial_threshold = polar.radius_at_rank(config.k + 1);
    fill_projection_diagnostics(estimate, result);

    const double u_all = gumbel_to_frechet(config.threshold_y, 1.0);
    const double u_pair = gumbel_to_frechet(config.threshold_v, 1.0);
    const double cap = frechet_quantile(0.5, 1.0); // Frechet median

    FailureRegion region_all{{0, 1, 2}, {u_all, u_all, u_all}, {}};
    FailureRegion region_pair{{0, 1}, {u_pair, u_pair}, {cap}};

    const TailProb p1 = failure_prob_approx(estimate, region_all);
    const TailProb p2 = failure_prob_approx(estimate, region_pair);
    result.p1 = p1.value;
    result.p2 = p2.value;
    result.p1_clamped = p1.clamped;
    result.p2_clamped = p2.clamped;
    result.cap_factor_p2 = cap_factor_independent(region_pair, 3, 1.0);
    return result;
}

ChallengeResult run_challenge4(const Matrix& data, const PipelineConfig& config) {
    if (config.n_clusters < 2) {
        throw std::invalid_argument("run_challenge4: need K >= 2");
    }
    const std::size_t d = data.cols();
    if (static_cast<std::size_t>(config.n_clusters) > d) {
        throw std::invalid_argument("run_challenge4: K exceeds the number of variables");
    }
    const double alpha = config.alpha();

    ChallengeResult result;
    const DistanceMatrix dist = fmadogram_matrix(data);
    const ClusterPartition partition = pam_cluster(dist, config.n_clusters, config.seed);
    result.partition = partition;
    result.block_report = validate_blocks(dist, partition);

    const Matrix frechet = transform_margins(data, alpha, config.gumbel_input);

    // u1 mixes the two per-area levels; u2 applies the rarer level everywhere.
    std::vector<double> u1(d);
    std::vector<double> u2(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double phi = i < config.area1_count ? config.phi1 : config.phi2;
        u1[i] = frechet_quantile(1.0 - phi, alpha);
        u2[i] = frechet_quantile(1.0 - config.phi1, alpha);
    }

    const auto k = static_cast<std::size_t>(config.n_clusters);
    std::vector<MaxLinearModel> cluster_models;
    std::vector<FailureRegion> regions1;
    std::vector<FailureRegion> regions2;
    std::vector<std::vector<DistributionPoint>> cp_dists1;
    std::vector<std::vector<DistributionPoint>> cp_dists2;

    for (std::size_t l = 0; l < k; ++l) {
        ClusterReport report;
        for (std::size_t i = 0; i < d; ++i) {
            if (partition.labels[i] == static_cast<int>(l)) {
                report.members.push_back(i);
            }
        }
        const std::size_t dl = report.members.size();
        if (dl == 1) {
            result.notes.push_back("cluster " + std::to_string(l + 1) +
                                   " has a single variable; its joint exceedance "
                                   "degrades to a marginal one");
        }
        Matrix sub(data.rows(), dl);
        for (std::size_t t = 0; t < data.rows(); ++t) {
            for (std::size_t m = 0; m < dl; ++m) {
                sub(t, m) = frechet(t, report.members[m]);
            }
        }
        FailureRegion region1;
        FailureRegion region2;
        for (std::size_t m = 0; m < dl; ++m) {
            region1.beta.push_back(m);
            region2.beta.push_back(m);
            region1.u.push_back(u1[report.members[m]]);
            region2.u.push_back(u2[report.members[m]]);
        }

        const PolarSample polar = polar_decompose(sub, alpha);
        if (config.estimator == Estimator::Cp) {
            const Tpdm tpdm = empirical_tpdm(polar, config.k);
            report.tpdm = tpdm.sigma;
            std::vector<MaxLinearModel> ensemble;
            if (dl == 1) {
                MaxLinearModel trivial;
                trivial.alpha = 2.0;
                trivial.A = Matrix(1, 1, {std::sqrt(tpdm.sigma(0, 0))});
                ensemble.assign(config.n_cp, trivial);
            } else {
                ensemble = random_cp_ensemble(tpdm, config.n_cp, split_seed(config.seed, l));
            }
            std::vector<double> values1;
            std::vector<double> values2;
            values1.reserve(ensemble.size());
            values2.reserve(ensemble.size());
            for (const auto& factor : ensemble) {
                values1.push_back(failure_prob_approx(factor, region1).value);
                values2.push_back(failure_prob_approx(factor, region2).value);
            }
            report.dist1 = tally_distinct(values1);
            report.dist2 = tally_distinct(values2);
            report.p1 = weighted_median(report.dist1);
            report.p2 = weighted_median(report.dist2);
            cp_dists1.push_back(report.dist1);
            cp_dists2.push_back(report.dist2);
        } else {
            const MaxLinearModel estimate = config.estimator == Estimator::Sparse
                                                ? sparse_empirical_A(polar, config.k)
                                                : empirical_A(polar, config.k);
            if (config.estimator == Estimator::Empirical) {
                report.tpdm = estimate.A.times_transpose();
            }
            const TailProb p1 = failure_prob_approx(estimate, region1);
            const TailProb p2 = failure_prob_approx(estimate, region2);
            report.p1 = p1.value;
            report.p2 = p2.value;
            cluster_models.push_back(estimate);
            regions1.push_back(region1);
            regions2.push_back(region2);
        }
        result.clusters.push_back(std::move(report));
    }

    if (config.estimator == Estimator::Cp) {
        result.dist1 = enumerate_products(cp_dists1);
        result.dist2 = enumerate_products(cp_dists2);
        result.p1 = weighted_median(result.dist1);
        result.p2 = weighted_median(result.dist2);
    } else {
        const TailProb p1 = product_rule_prob(cluster_models, regions1);
        const TailProb p2 = product_rule_prob(cluster_models, regions2);
        result.p1 = p1.value;
        result.p2 = p2.value;
        result.p1_clamped = p1.clamped;
        result.p2_clamped = p2.clamped;
    }
    return result;
}

SweepResult k_sensitivity_sweep(const Matrix& data, const PipelineConfig& config,
                                std::span<const std::size_t> k_values, int challenge) {
    if (k_values.empty()) {
        throw std::invalid_argument("k_sensitivity_sweep: empty k list");
    }
    if (challenge != 3 && challenge != 4) {
        throw std::invalid_argument("k_sensitivity_sweep: challenge must be 3 or 4");
    }
    SweepResult sweep;
    sweep.challenge = challenge;
    for (std::size_t k : k_values) {
        SweepRow row;
        row.k = k;
        PipelineConfig run = config;
        run.k = k;
        try {
            const ChallengeResult res =
                challenge == 3 ? run_challenge3(data, run) : run_challenge4(data, run);
            row.ok = true;
            row.p1 = res.p1;
            row.p2 = res.p2;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        sweep.rows.push_back(std::move(row));
    }

    // Dispersion of log-estimates, lower-k half against upper-k half.
    std::vector<SweepRow> sorted = sweep.rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.k < b.k; });
    std::vector<double> lo1, hi1, lo2, hi2;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!sorted[i].ok || !(sorted[i].p1 > 0.0) || !(sorted[i].p2 > 0.0)) {
            continue;
        }
        const bool lower = i < sorted.size() / 2;
        (lower ? lo1 : hi1).push_back(std::log10(sorted[i].p1));
        (lower ? lo2 : hi2).push_back(std::log10(sorted[i].p2));
    }
    const double v_hi1 = variance_of(hi1);
    const double v_hi2 = variance_of(hi2);
    sweep.variance_ratio_p1 = v_hi1 > 0.0 ? variance_of(lo1) / v_hi1 : 0.0;
    sweep.variance_ratio_p2 = v_hi2 > 0.0 ? variance_of(lo2) / v_hi2 : 0.0;
    sweep.small_k_variable = sweep.variance_ratio_p1 > 4.0 || sweep.variance_ratio_p2 > 4.0;
    return sweep;
}

std::vector<DistributionPoint> enumerate_products(
    const std::vector<std::vector<DistributionPoint>>& per_cluster) {
    if (per_cluster.empty()) {
        throw std::invalid_argument("enumerate_products: no clusters");
    }
    std::map<double, std::uint64_t> current{{1.0, 1}};
    for (const auto& cluster : per_cluster) {
        if (cluster.empty()) {
            throw std::invalid_argument("enumerate_products: empty cluster distribution");
        }
        std::map<double, std::uint64_t> next;
        for (const auto& [value, weight] : current) {
            for (const auto& point : cluster) {
                next[value * point.value] += weight * point.weight;
            }
        }
        current = std::move(next);
    }
    std::vector<DistributionPoint> out;
    out.reserve(current.size());
    for (const auto& [value, weight] : current) {
        out.push_back({value, weight});
    }
    return out;
}

double weighted_median(std::vector<DistributionPoint> points) {
    if (points.empty()) {
        throw std::invalid_argument("weighted_median: empty distribution");
    }
    std::sort(points.begin(), points.end(),
              [](const DistributionPoint& a, const DistributionPoint& b) {
                  return a.value < b.value;
              });
    std::uint64_t total = 0;
    for (const auto& p : points) {
        total += p.weight;
    }
    if (total == 0) {
        throw std::invalid_argument("weighted_median: zero total weight");
    }
    const std::uint64_t rank_lo = (total + 1) / 2;
    const std::uint64_t rank_hi = total / 2 + 1;
    double v_lo = 0.0;
    double v_hi = 0.0;
    std::uint64_t cum = 0;
    bool have_lo = false;
    for (const auto& p : points) {
        cum += p.weight;
        if (!have_lo && cum >= rank_lo) {
            v_lo = p.value;
            have_lo = true;
        }
        if (cum >= rank_hi) {
            v_hi = p.value;
            break;
        }
    }
    return 0.5 * (v_lo + v_hi);
}

Json challenge_result_to_json(const ChallengeResult& result) {
    Json j;
    j["point_estimates"] = Json{{"p1", result.p1}, {"p2", result.p2}};
    j["clamped"] = Json{{"p1", result.p1_clamped}, {"p2", result.p2_clamped}};
    auto dist_json = [](const std::vector<DistributionPoint>& dist) {
        Json arr = Json::array();
        for (const auto& p : dist) {
            arr.push_back(Json::array({p.value, p.weight}));
        }
        return arr;
    };
    if (!result.dist1.empty()) {
        j["estimate_distribution"] = Json{{"p1", dist_json(result.dist1)},
                                          {"p2", dist_json(result.dist2)}};
    }
    if (!result.clusters.empty()) {
        Json clusters = Json::array();
        for (const auto& report : result.clusters) {
            Json c;
            Json members = Json::array();
            for (std::size_t m : report.members) {
                members.push_back(m + 1);
            }
            c["members"] = members;
            c["size"] = report.members.size();
            c["p1"] = report.p1;
            c["p2"] = report.p2;
            if (!report.dist1.empty()) {
                c["dist1"] = dist_json(report.dist1);
                c["dist2"] = dist_json(report.dist2);
            }
            if (report.tpdm) {
                c["tpdm"] = matrix_to_json(*report.tpdm);
                // off-diagonal summary, as in the cluster overview table
                std::vector<double> off;
                for (std::size_t a = 0; a < report.tpdm->rows(); ++a) {
                    for (std::size_t b = a + 1; b < report.tpdm->cols(); ++b) {
                        off.push_back((*report.tpdm)(a, b));
                    }
                }
                if (!off.empty()) {
                    std::sort(off.begin(), off.end());
                    c["tpdm_offdiag"] = Json{{"min", off.front()},
                                             {"median", off[off.size() / 2]},
                                             {"max", off.back()}};
                }
            }
            clusters.push_back(std::move(c));
        }
        j["per_cluster"] = clusters;
    }
    if (result.partition) {
        j["partition"] = partition_to_json(*result.partition);
    }
    if (result.block_report) {
        j["block_validation"] = Json{{"max_within", result.block_report->max_within},
                                     {"min_between", result.block_report->min_between},
                                     {"consistent", result.block_report->consistent}};
    }
    Json diag;
    diag["n_interior"] = result.n_interior;
    diag["n_edge"] = result.n_edge;
    diag["n_vertex"] = result.n_vertex;
    diag["n_compressed"] = result.n_compressed;
    if (!result.support_counts.empty()) {
        diag["support_counts"] = result.support_counts;
    }
    if (result.radial_threshold > 0.0) {
        diag["radial_threshold"] = result.radial_threshold;
    }
    diag["cap_factor_p2"] = result.cap_factor_p2;
    j["diagnostics"] = diag;
    if (!result.notes.empty()) {
        j["notes"] = result.notes;
    }
    return j;
}

Json sweep_result_to_json(const SweepResult& result) {
    Json rows = Json::array();
    for (const auto& row : result.rows) {
        Json r{{"k", row.k}, {"ok", row.ok}};
        if (row.ok) {
            r["p1"] = row.p1;
            r["p2"] = row.p2;
        } else {
            r["error"] = row.error;
        }
        rows.push_back(std::move(r));
    }
    return Json{{"challenge", result.challenge},
                {"rows", rows},
                {"variance_ratio_p1", result.variance_ratio_p1},
                {"variance_ratio_p2", result.variance_ratio_p2},
                {"small_k_variable", result.small_k_variable}};
}

std::string sweep_result_to_csv(const SweepResult& result) {
    std::string out = "k,p1,p2\n";
    for (const auto& row : result.rows) {
        if (!row.ok) {
            continue;
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", row.k, row.p1, row.p2);
        out += buf;
    }
    return out;
}

} // namespace evt
