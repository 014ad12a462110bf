#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace evt {

struct McmcChain {
    std::vector<std::vector<double>> samples; // post burn-in states
    double acceptance_rate = 0.0;             // over all iterations
};

// Random-walk Metropolis with independent Gaussian proposals per coordinate.
// log_target may return -infinity to mark infeasible states; the initial
// state must be feasible. Deterministic given the seed.
McmcChain random_walk_metropolis(
    const std::function<double(const std::vector<double>&)>& log_target,
    std::vector<double> init, const std::vector<double>& step, int n_iter,
    int burn_in, std::uint64_t seed);

} // namespace evt
