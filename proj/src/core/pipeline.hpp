#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/clustering.hpp"
#include "core/json_io.hpp"
#include "core/matrix.hpp"
#include "core/max_linear.hpp"
#include "core/tpdm.hpp"

namespace evt {

enum class Estimator {
    Empirical,
    Sparse,
    Cp,
};

std::string estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);

// Tuning knobs shared by the challenge pipelines. The tail index is tied to
// the estimator: simplex projections live on the L1 scale and CP estimation
// rests on the TPDM, hence alpha 1 and 2 respectively.
struct PipelineConfig {
    Estimator estimator = Estimator::Sparse;
    std::size_t k = 500;       // number of extreme observations
    int n_clusters = 5;        // K, joint-exceedance pipeline only
    std::size_t n_cp = 50;     // CP ensemble size per cluster
    std::uint64_t seed = 0;
    bool gumbel_input = true;  // transform margins before fitting

    // Region thresholds on the Gumbel scale (trivariate pipeline).
    double threshold_y = 6.0;
    double threshold_v = 7.0;

    // Per-area marginal exceedance probabilities (joint pipeline); variables
    // 1..area1_count get phi1 under u1, the rest phi2; u2 uses phi1 for all.
    double phi1 = 1.0 / 300.0;
    double phi2 = 12.0 / 300.0;
    std::size_t area1_count = 25;

    double alpha() const { return estimator == Estimator::Sparse ? 1.0 : 2.0; }
};

struct DistributionPoint {
    double value = 0.0;
    std::uint64_t weight = 0;
};

struct ClusterReport {
    std::vector<std::size_t> members; // 0-based variable indices
    double p1 = 0.0;
    double p2 = 0.0;
    std::vector<DistributionPoint> dist1; // distinct CP values with counts
    std::vector<DistributionPoint> dist2;
    std::optional<Matrix> tpdm; // alpha = 2 estimators only
};

struct ChallengeResult {
    double p1 = 0.0;
    double p2 = 0.0;
    bool p1_clamped = false;
    bool p2_clamped = false;
    std::vector<DistributionPoint> dist1; // CP product distribution
    std::vector<DistributionPoint> dist2;
    std::vector<ClusterReport> clusters;
    std::optional<ClusterPartition> partition;
    std::optional<BlockReport> block_report;

    // Projection diagnostics (sparse estimator).
    std::size_t n_interior = 0;
    std::size_t n_edge = 0;
    std::size_t n_vertex = 0;
    std::size_t n_compressed = 0;
    std::map<std::string, std::size_t> support_counts; // small d only
    double radial_threshold = 0.0;
    double cap_factor_p2 = 1.0;

    std::vector<std::string> notes;
};

// Trivariate pipeline: Gumbel data -> unit Frechet, sparse empirical
// estimate on the k largest radii, then the limit formula for
// P(all three large) at exp(threshold_y) and P(first two large, third below
// median) at exp(threshold_v). Requires the sparse estimator.
ChallengeResult run_challenge3(const Matrix& data, const PipelineConfig& config);

// Joint-exceedance pipeline: F-madogram + PAM clustering into K blocks,
// per-cluster estimation, then the across-cluster product rule. CP runs an
// ensemble per cluster and reports the weighted median over all distinct
// product combinations.
ChallengeResult run_challenge4(const Matrix& data, const PipelineConfig& config);

struct SweepRow {
    std::size_t k = 0;
    bool ok = false;
    double p1 = 0.0;
    double p2 = 0.0;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int challenge = 3;
    double variance_ratio_p1 = 0.0; // var(log10 p1) in the lower-k half over
                                    // the upper-k half
    double variance_ratio_p2 = 0.0;
    bool small_k_variable = false;  // ratio above 4 on either estimate
};

SweepResult k_sensitivity_sweep(const Matrix& data, const PipelineConfig& config,
                                std::span<const std::size_t> k_values, int challenge);

// Cartesian product of per-cluster distributions: values multiply, weights
// (occurrence counts) multiply, exactly equal products merge. The result has
// at most prod_l |cluster_l| distinct values regardless of ensemble size.
std::vector<DistributionPoint> enumerate_products(
    const std::vector<std::vector<DistributionPoint>>& per_cluster);

// Median over a weighted empirical distribution: the usual average of the
// two middle ranks, so it is recomputable from the emitted (value, weight)
// pairs.
double weighted_median(std::vector<DistributionPoint> points);

Json challenge_result_to_json(const ChallengeResult& result);
Json sweep_result_to_json(const SweepResult& result);
std::string sweep_result_to_csv(const SweepResult& result);

} // namespace evt
