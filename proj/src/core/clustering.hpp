#pragma once

#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace evt {

// Symmetric, zero-diagonal, entries in [0, 1/2].
struct DistanceMatrix {
    Matrix d;
    std::size_t size() const { return d.rows(); }
};

// Labels are 0-based cluster ids; medoids[l] is the variable index anchoring
// cluster l, so labels[medoids[l]] == l.
struct ClusterPartition {
    std::vector<int> labels;
    int n_clusters = 0;
    std::vector<std::size_t> medoids;
};

// Rank-based F-madogram distances: d_ij = (1/2n) sum_t |F_i(x_ti) - F_j(x_tj)|
// with margins rank/(n+1) (midranks under ties). 0 for comonotone pairs,
// about 1/6 for asymptotically independent ones. Depends on the data only
// through ranks, so any strictly increasing marginal transform leaves it
// unchanged. Constant columns have no ranks and are rejected.
DistanceMatrix fmadogram_matrix(const Matrix& data);

// Classic PAM: greedy BUILD, then best-improvement SWAP to a local optimum of
// the total distance to the nearest medoid. Deterministic; ties break toward
// the lowest index, and the seed is accepted only for interface stability.
ClusterPartition pam_cluster(const DistanceMatrix& dist, int n_clusters,
                             std::uint64_t seed = 0);

// Total distance to the nearest medoid (the PAM objective).
double pam_cost(const DistanceMatrix& dist, const std::vector<std::size_t>& medoids);

struct BlockReport {
    double max_within = 0.0;
    double min_between = 0.0;
    bool consistent = false;
};

// Checks the blockwise asymptotic-dependence assumption: within-cluster
// distances should sit clearly below the independence landmark 1/6 and
// between-cluster distances around it. Defaults put both fences at
// 1/6 - 0.02.
BlockReport validate_blocks(const DistanceMatrix& dist, const ClusterPartition& partition,
                            double tol_within = 1.0 / 6.0 - 0.02,
                            double tol_between = 1.0 / 6.0 - 0.02);

// Mean silhouette width over all variables; advisory aid for choosing the
// cluster count.
double silhouette_score(const DistanceMatrix& dist, const ClusterPartition& partition);

} // namespace evt
