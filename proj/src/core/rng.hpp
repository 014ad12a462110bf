#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace evt {

// Mixes (seed, index) into an independent stream seed. Replicates, batches
// and ensemble attempts each get their own stream so results do not depend
// on scheduling order.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled variate transforms. The engine's output is
// fully specified by the standard; the <random> distributions are not, so
// transforms are done here to keep seeded runs reproducible across
// toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; uses two uniforms per variate, no caching.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform index in [0, n) via rejection, unbiased.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = gen_();
        while (x >= limit) {
            x = gen_();
        }
        return static_cast<std::size_t>(x % bound);
    }

  private:
    std::mt19937_64 gen_;
};

inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = i;
    }
    for (std::size_t i = n; i > 1; --i) {
        std::swap(p[i - 1], p[rng.uniform_index(i)]);
    }
    return p;
}

} // namespace evt
