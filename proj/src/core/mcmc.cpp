#include "core/mcmc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/rng.hpp"

namespace evt {

McmcChain random_walk_metropolis(
    const std::function<double(const std::vector<double>&)>& log_target,
    std::vector<double> init, const std::vector<double>& step, int n_iter,
    int burn_in, std::uint64_t seed) {
    if (init.size() != step.size()) {
        throw std::invalid_argument("random_walk_metropolis: dimension mismatch");
    }
    for (double s : step) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("random_walk_metropolis: step sizes must be positive");
        }
    }
    if (n_iter <= 0 || burn_in < 0 || burn_in >= n_iter) {
        throw std::invalid_argument("random_walk_metropolis: need 0 <= burn_in < n_iter");
    }

    Rng rng(seed);
    const std::size_t dim = init.size();
    double current_lp = log_target(init);
    if (!(current_lp > -std::numeric_limits<double>::infinity())) {
        throw std::invalid_argument("random_walk_metropolis: infeasible initial state");
    }

    McmcChain chain;
    chain.samples.reserve(static_cast<std::size_t>(n_iter - burn_in));
    std::vector<double> proposal(dim);
    long accepted = 0;
    for (int it = 0; it < n_iter; ++it) {
        for (std::size_t d = 0; d < dim; ++d) {
            proposal[d] = init[d] + step[d] * rng.normal();
        }
        const double prop_lp = log_target(proposal);
        // log(u) < prop - current; -inf proposals always rejected
        if (std::log(rng.uniform()) < prop_lp - current_lp) {
            init = proposal;
            current_lp = prop_lp;
            ++accepted;
        }
        if (it >= burn_in) {
            chain.samples.push_back(init);
        }
    }
    chain.acceptance_rate = static_cast<double>(accepted) / n_iter;
    return chain;
}

} // namespace evt
