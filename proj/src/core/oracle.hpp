#pragma once

#include <cstdint>

#include "core/matrix.hpp"
#include "core/max_linear.hpp"

namespace evt {

struct McEstimate {
    double p_hat = 0.0;
    std::uint64_t n_sim = 0;
    double std_err = 0.0; // binomial sqrt(p(1-p)/n)
    std::uint64_t seed = 0;
    std::uint64_t n_hits = 0;
};

// Brute-force ground truth for the failure-region probability: simulates the
// model and counts {x_beta > u, x_{beta^c} < l}. Caps are enforced here,
// unlike in the limit formula. Draws stream through fixed-size batches with
// seeds derived from (seed, batch index), so the count is identical whether
// batches run sequentially or in parallel.
McEstimate mc_failure_prob(const MaxLinearModel& model, const FailureRegion& region,
                           std::uint64_t n_sim, std::uint64_t seed);

// Relative frequency of the region event in observed data. Fails loudly on
// rare regions by construction: zero hits give a zero estimate.
McEstimate empirical_region_prob(const Matrix& data, const FailureRegion& region);

} // namespace evt
