#include "core/oracle.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace evt {

namespace {

constexpr std::uint64_t kBatchSize = 1 << 20;

double binomial_std_err(double p, std::uint64_t n) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

bool region_hit(std::span<const double> x, const FailureRegion& region,
                std::span<const std::size_t> comp) {
    for (std::size_t b = 0; b < region.beta.size(); ++b) {
        if (!(x[region.beta[b]] > region.u[b])) {
            return false;
        }
    }
    if (!region.l.empty()) {
        for (std::size_t c = 0; c < comp.size(); ++c) {
            if (!(x[comp[c]] < region.l[c])) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

McEstimate mc_failure_prob(const MaxLinearModel& model, const FailureRegion& region,
                           std::uint64_t n_sim, std::uint64_t seed) {
    model.validate();
    region.validate(model.dim());
    if (n_sim < 1) {
        throw std::invalid_argument("mc_failure_prob: n_sim must be >= 1");
    }
    const auto comp = region.complement(model.dim());
    const std::size_t d = model.dim();
    const std::size_t q = model.n_cols();
    const double inv_alpha = 1.0 / model.alpha;

    const std::uint64_t n_batches = (n_sim + kBatchSize - 1) / kBatchSize;
    std::vector<std::uint64_t> batch_hits(n_batches, 0);
    parallel_for(n_batches, [&](std::size_t b) {
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBatchSize;
        const std::uint64_t hi = std::min(n_sim, lo + kBatchSize);
        Rng rng(split_seed(seed, b));
        std::vector<double> z(q);
        std::vector<double> x(d);
        std::uint64_t hits = 0;
        for (std::uint64_t t = lo; t < hi; ++t) {
            for (std::size_t j = 0; j < q; ++j) {
                z[j] = std::pow(-std::log(rng.uniform()), -inv_alpha);
            }
            for (std::size_t i = 0; i < d; ++i) {
                double m = 0.0;
                const auto row = model.A.row(i);
                for (std::size_t j = 0; j < q; ++j) {
                    m = std::max(m, row[j] * z[j]);
                }
                x[i] = m;
            }
            if (region_hit(x, region, comp)) {
                ++hits;
            }
        }
        batch_hits[b] = hits;
    });

    std::uint64_t hits = 0;
    for (std::uint64_t h : batch_hits) {
        hits += h;
    }
    McEstimate est;
    est.n_hits = hits;
    est.n_sim = n_sim;
    est.seed = seed;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(n_sim);
    est.std_err = binomial_std_err(est.p_hat, n_sim);
    return est;
}

McEstimate empirical_region_prob(const Matrix& data, const FailureRegion& region) {
    if (data.rows() < 1) {
        throw std::invalid_argument("empirical_region_prob: empty data");
    }
    region.validate(data.cols());
    const auto comp = region.complement(data.cols());
    std::uint64_t hits = 0;
    for (std::size_t t = 0; t < data.rows(); ++t) {
        if (region_hit(data.row(t), region, comp)) {
            ++hits;
        }
    }
    McEstimate est;
    est.n_hits = hits;
    est.n_sim = data.rows();
    est.seed = 0;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(data.rows());
    est.std_err = binomial_std_err(est.p_hat, est.n_sim);
    return est;
}

} // namespace evt
