#include "core/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace evt {

namespace {

// Midranks divided by n+1, one column at a time.
std::vector<double> rank_margin(const Matrix& data, std::size_t col) {
    const std::size_t n = data.rows();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return data(a, col) < data(b, col);
    });
    if (data(idx.front(), col) == data(idx.back(), col)) {
        throw std::invalid_argument("fmadogram_matrix: column " + std::to_string(col + 1) +
                                    " is constant");
    }
    std::vector<double> f(n);
    std::size_t t = 0;
    while (t < n) {
        std::size_t e = t;
        while (e + 1 < n && data(idx[e + 1], col) == data(idx[t], col)) {
            ++e;
        }
        // 1-based ranks t+1 .. e+1 share the midrank
        const double midrank = (static_cast<double>(t + 1) + static_cast<double>(e + 1)) / 2.0;
        for (std::size_t m = t; m <= e; ++m) {
            f[idx[m]] = midrank / static_cast<double>(n + 1);
        }
        t = e + 1;
    }
    return f;
}

void check_partition(const DistanceMatrix& dist, const ClusterPartition& partition) {
    const std::size_t d = dist.size();
    if (partition.labels.size() != d) {
        throw std::invalid_argument("partition does not match distance matrix dimension");
    }
    for (int lab : partition.labels) {
        if (lab < 0 || lab >= partition.n_clusters) {
            throw std::invalid_argument("partition labels out of range");
        }
    }
}

} // namespace

DistanceMatrix fmadogram_matrix(const Matrix& data) {
    if (data.rows() < 2 || data.cols() < 1) {
        throw std::invalid_argument("fmadogram_matrix: need at least 2 rows");
    }
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    std::vector<std::vector<double>> margins(d);
    for (std::size_t i = 0; i < d; ++i) {
        margins[i] = rank_margin(data, i);
    }
    DistanceMatrix out;
    out.d = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                s += std::abs(margins[i][t] - margins[j][t]);
            }
            const double value = s / (2.0 * static_cast<double>(n));
            out.d(i, j) = value;
            out.d(j, i) = value;
        }
    }
    return out;
}

double pam_cost(const DistanceMatrix& dist, const std::vector<std::size_t>& medoids) {
    double total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m : medoids) {
            best = std::min(best, dist.d(i, m));
        }
        total += best;
    }
    return total;
}

ClusterPartition pam_cluster(const DistanceMatrix& dist, int n_clusters, std::uint64_t) {
    const std::size_t d = dist.size();
    if (n_clusters < 1 || static_cast<std::size_t>(n_clusters) > d) {
        throw std::invalid_argument("pam_cluster: K must lie in [1, d]");
    }
    const std::size_t k = static_cast<std::size_t>(n_clusters);

    // BUILD: first the 1-median, then greedily the point with the largest
    // cost reduction.
    std::vector<std::size_t> medoids;
    std::vector<bool> is_medoid(d, false);
    {
        double best_cost = std::numeric_limits<double>::infinity();
        std::size_t best = 0;
        for (std::size_t c = 0; c < d; ++c) {
            double cost = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                cost += dist.d(i, c);
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = c;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = true;
    }
    std::vector<double> nearest(d);
    auto refresh_nearest = [&] {
        for (std::size_t i = 0; i < d; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t m : medoids) {
                best = std::min(best, dist.d(i, m));
            }
            nearest[i] = best;
        }
    };
    refresh_nearest();
    while (medoids.size() < k) {
        double best_gain = -1.0;
        std::size_t best = d;
        for (std::size_t c = 0; c < d; ++c) {
            if (is_medoid[c]) {
                continue;
            }
            double gain = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                gain += std::max(0.0, nearest[i] - dist.d(i, c));
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = true;
        refresh_nearest();
    }

    // SWAP: apply the single best strictly-improving (medoid, candidate)
    // exchange until none exists.
    bool improved = true;
    while (improved) {
        improved = false;
        const double current = pam_cost(dist, medoids);
        double best_cost = current;
        std::size_t best_slot = k;
        std::size_t best_cand = d;
        for (std::size_t slot = 0; slot < k; ++slot) {
            for (std::size_t cand = 0; cand < d; ++cand) {
                if (is_medoid[cand]) {
                    continue;
                }
                std::vector<std::size_t> trial = medoids;
                trial[slot] = cand;
                const double cost = pam_cost(dist, trial);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_slot = slot;
                    best_cand = cand;
                }
            }
        }
        if (best_slot < k) {
            is_medoid[medoids[best_slot]] = false;
            medoids[best_slot] = best_cand;
            is_medoid[best_cand] = true;
            improved = true;
        }
    }

    std::sort(medoids.begin(), medoids.end());
    ClusterPartition partition;
    partition.n_clusters = n_clusters;
    partition.medoids = medoids;
    partition.labels.resize(d);
    // medoids anchor their own clusters even when distances tie at zero
    std::vector<int> medoid_label(d, -1);
    for (std::size_t l = 0; l < medoids.size(); ++l) {
        medoid_label[medoids[l]] = static_cast<int>(l);
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (medoid_label[i] >= 0) {
            partition.labels[i] = medoid_label[i];
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        int label = 0;
        for (std::size_t l = 0; l < medoids.size(); ++l) {
            if (dist.d(i, medoids[l]) < best) {
                best = dist.d(i, medoids[l]);
                label = static_cast<int>(l);
            }
        }
        partition.labels[i] = label;
    }
    return partition;
}

BlockReport validate_blocks(const DistanceMatrix& dist, const ClusterPartition& partition,
                            double tol_within, double tol_between) {
    check_partition(dist, partition);
    if (partition.n_clusters < 2) {
        throw std::invalid_argument("validate_blocks: need K >= 2 for between-cluster pairs");
    }
    const std::size_t d = dist.size();
    BlockReport report;
    report.max_within = 0.0;
    report.min_between = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (partition.labels[i] == partition.labels[j]) {
                report.max_within = std::max(report.max_within, dist.d(i, j));
            } else {
                report.min_between = std::min(report.min_between, dist.d(i, j));
            }
        }
    }
    report.consistent =
        report.max_within < tol_within && report.min_between > tol_between;
    return report;
}

double silhouette_score(const DistanceMatrix& dist, const ClusterPartition& partition) {
    check_partition(dist, partition);
    const std::size_t d = dist.size();
    const int k = partition.n_clusters;
    if (k < 2) {
        return 0.0;
    }
    std::vector<std::size_t> cluster_size(static_cast<std::size_t>(k), 0);
    for (int lab : partition.labels) {
        ++cluster_size[static_cast<std::size_t>(lab)];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> mean_dist(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            if (j != i) {
                mean_dist[static_cast<std::size_t>(partition.labels[j])] += dist.d(i, j);
            }
        }
        const std::size_t own = static_cast<std::size_t>(partition.labels[i]);
        double a = 0.0;
        if (cluster_size[own] > 1) {
            a = mean_dist[own] / static_cast<double>(cluster_size[own] - 1);
        }
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c != own && cluster_size[c] > 0) {
                b = std::min(b, mean_dist[c] / static_cast<double>(cluster_size[c]));
            }
        }
        const double denom = std::max(a, b);
        if (cluster_size[own] > 1 && std::isfinite(b) && denom > 0.0) {
            total += (b - a) / denom;
        }
        // singletons contribute 0
    }
    return total / static_cast<double>(d);
}

} // namespace evt
