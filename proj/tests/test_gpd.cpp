#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "core/error.hpp"
#include "core/gpd.hpp"
#include "core/margins.hpp"
#include "core/mcmc.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

using namespace evt;

namespace {

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double var_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double v = 0.0;
    for (double x : xs) {
        v += (x - m) * (x - m);
    }
    return v / static_cast<double>(xs.size());
}

// Monte Carlo standard error of a chain mean via batch means.
double batch_se(const std::vector<double>& xs, std::size_t n_batches = 50) {
    const std::size_t batch = xs.size() / n_batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * batch; i < (b + 1) * batch; ++i) {
            s += xs[i];
        }
        means.push_back(s / static_cast<double>(batch));
    }
    return std::sqrt(var_of(means) / static_cast<double>(n_batches));
}

} // namespace

TEST_CASE("log likelihood limits and support") {
    const std::vector<double> one{1.0};
    CHECK(gpd_log_likelihood(one, 1.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(gpd_log_likelihood(one, 1.0, 1e-12) == doctest::Approx(-1.0).epsilon(1e-6));
    // support violation: 1 + xi y / sigma <= 0
    const std::vector<double> big{3.0};
    CHECK(gpd_log_likelihood(big, 1.0, -0.5) == -std::numeric_limits<double>::infinity());
    CHECK(gpd_log_likelihood(one, -1.0, 0.1) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log likelihood is higher at the truth than far from it") {
    Rng rng(11);
    const auto data = simulate_gpd(180, 15.0, 0.05, rng);
    CHECK(gpd_log_likelihood(data, 15.0, 0.05) > gpd_log_likelihood(data, 30.0, 0.5));
}

TEST_CASE("mle recovers parameters at large n") {
    Rng rng(2024);
    const auto data = simulate_gpd(100000, 2.0, 0.2, rng);
    const auto fit = fit_gpd_mle(data);
    CHECK(fit.sigma > 1.95);
    CHECK(fit.sigma < 2.05);
    CHECK(fit.xi > 0.18);
    CHECK(fit.xi < 0.22);
    CHECK(fit.se_sigma > 0.0);
    CHECK(fit.se_xi > 0.0);
    // standard errors should roughly bracket the truth
    CHECK(std::abs(fit.sigma - 2.0) < 4.0 * fit.se_sigma);
    CHECK(std::abs(fit.xi - 0.2) < 4.0 * fit.se_xi);
}

TEST_CASE("mle rejects degenerate data") {
    const std::vector<double> flat(30, 1.5);
    CHECK_THROWS_AS(fit_gpd_mle(flat), NumericError);
    const std::vector<double> tiny{1.0, 2.0};
    CHECK_THROWS_AS(fit_gpd_mle(tiny), std::invalid_argument);
}

TEST_CASE("mle beats a dense grid") {
    Rng rng(5150);
    const auto data = simulate_gpd(180, 15.0, 0.05, rng);
    const auto fit = fit_gpd_mle(data);
    double best_grid = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
            const double sigma = 5.0 + 25.0 * i / 99.0;
            const double xi = -0.3 + 0.8 * j / 99.0;
            best_grid = std::max(best_grid, gpd_log_likelihood(data, sigma, xi));
        }
    }
    CHECK(fit.log_lik >= best_grid);
}

TEST_CASE("mle beats coarse grids on many random datasets") {
    Rng meta(8888);
    for (int rep = 0; rep < 50; ++rep) {
        const double sigma_true = meta.uniform(0.5, 20.0);
        const double xi_true = meta.uniform(-0.4, 0.6);
        Rng rng(split_seed(1234, static_cast<std::uint64_t>(rep)));
        const auto data = simulate_gpd(150, sigma_true, xi_true, rng);
        const auto fit = fit_gpd_mle(data);
        double best_grid = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 40; ++i) {
            for (int j = 0; j < 40; ++j) {
                const double sigma = 0.25 * sigma_true + 2.0 * sigma_true * i / 39.0;
                const double xi = -0.8 + 1.8 * j / 39.0;
                best_grid = std::max(best_grid, gpd_log_likelihood(data, sigma, xi));
            }
        }
        CHECK(fit.log_lik >= best_grid - 1e-9);
    }
}

TEST_CASE("bayes posterior concentrates around the truth") {
    Rng rng(314159);
    const auto data = simulate_gpd(10000, 15.0, 0.05, rng);
    McmcConfig config;
    config.n_iter = 10000;
    config.burn_in = 2000;
    config.step_sigma = 0.02; // posterior is tight at n = 1e4
    config.step_xi = 0.015;
    config.seed = 42;
    const auto post = fit_gpd_bayes(data, GpdPrior{}, config);
    CHECK(post.sigma.size() == 8000);
    CHECK(post.acceptance_rate > 0.15);
    CHECK(post.acceptance_rate < 0.6);
    const double m_sigma = mean_of(post.sigma);
    const double m_xi = mean_of(post.xi);
    const double sd_sigma = std::sqrt(var_of(post.sigma));
    const double sd_xi = std::sqrt(var_of(post.xi));
    CHECK(std::abs(m_sigma - 15.0) < 3.0 * sd_sigma);
    CHECK(std::abs(m_xi - 0.05) < 3.0 * sd_xi);
    // every retained pair is feasible on the fitted excesses
    for (std::size_t i = 0; i < post.sigma.size(); ++i) {
        CHECK(std::isfinite(gpd_log_likelihood(data, post.sigma[i], post.xi[i])));
    }
}

TEST_CASE("bayes with the likelihood disabled recovers the prior") {
    McmcConfig config;
    config.n_iter = 200000;
    config.burn_in = 20000;
    config.step_sigma = 0.8;
    config.step_xi = 1.2;
    config.seed = 7;
    const auto post = fit_gpd_bayes({}, GpdPrior{}, config, /*use_likelihood=*/false);
    // Gamma(4,1): mean 4, sd 2; Normal(0,1)
    CHECK(mean_of(post.sigma) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(std::sqrt(var_of(post.sigma)) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::abs(mean_of(post.xi)) < 0.05);
    CHECK(std::sqrt(var_of(post.xi)) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("bayes is deterministic given the seed") {
    Rng rng(99);
    const auto data = simulate_gpd(200, 10.0, 0.1, rng);
    McmcConfig config;
    config.n_iter = 3000;
    config.burn_in = 500;
    config.seed = 1234;
    const auto a = fit_gpd_bayes(data, GpdPrior{}, config);
    const auto b = fit_gpd_bayes(data, GpdPrior{}, config);
    CHECK(a.sigma == b.sigma);
    CHECK(a.xi == b.xi);
    CHECK(a.acceptance_rate == b.acceptance_rate);
}

TEST_CASE("bayes rejects bad configs") {
    Rng rng(1);
    const auto data = simulate_gpd(50, 2.0, 0.1, rng);
    McmcConfig config;
    config.step_sigma = 0.0;
    CHECK_THROWS_AS(fit_gpd_bayes(data, GpdPrior{}, config), std::invalid_argument);
    config = McmcConfig{};
    config.burn_in = config.n_iter;
    CHECK_THROWS_AS(fit_gpd_bayes(data, GpdPrior{}, config), std::invalid_argument);
}

TEST_CASE("metropolis matches a closed-form gamma posterior") {
    // Exponential likelihood with a Gamma prior on the rate is conjugate:
    // theta | y ~ Gamma(a + n, b + sum y). Run the generic sampler on that
    // density and compare moments.
    const double a_post = 54.0;
    const double b_post = 101.0;
    auto log_target = [&](const std::vector<double>& state) {
        const double theta = state[0];
        if (!(theta > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        return (a_post - 1.0) * std::log(theta) - b_post * theta;
    };
    const auto chain =
        random_walk_metropolis(log_target, {0.5}, {0.1}, 200000, 20000, 31337);
    std::vector<double> theta;
    theta.reserve(chain.samples.size());
    for (const auto& s : chain.samples) {
        theta.push_back(s[0]);
    }
    const double exact_mean = a_post / b_post;
    const double exact_var = a_post / (b_post * b_post);
    const double se_mean = batch_se(theta);
    CHECK(std::abs(mean_of(theta) - exact_mean) < 3.0 * se_mean);
    // variance comparison via batch means of squares
    std::vector<double> theta_sq;
    theta_sq.reserve(theta.size());
    for (double t : theta) {
        theta_sq.push_back(t * t);
    }
    const double se_sq = batch_se(theta_sq);
    const double exact_second = exact_var + exact_mean * exact_mean;
    CHECK(std::abs(mean_of(theta_sq) - exact_second) < 3.0 * se_sq);
}

TEST_CASE("jackknife interval is ordered and brackets the point estimate") {
    // the interquartile interval of leave-one-out quantiles sits around the
    // full-sample estimate; whether it strictly contains it depends on the
    // influence skew of the realized sample, so the seed is pinned
    Rng rng(244);
    const auto data = simulate_gpd(200, 2.0, 0.1, rng);
    const double zeta_u = 0.05;
    const double u = 10.0;
    const double p = 0.001;
    const auto [q25, q75] = jackknife_quantile_ci(data, p, u, zeta_u);
    CHECK(q25 <= q75);
    const auto fit = fit_gpd_mle(data);
    const double point = gpd_quantile(p, {fit.sigma, fit.xi, u, zeta_u});
    CHECK(q25 <= point);
    CHECK(point <= q75);
}

TEST_CASE("jackknife with massively repeated values degenerates to a point") {
    // Deleting any copy of the dominant value gives the same refit, so more
    // than three quarters of the leave-one-out quantiles coincide.
    std::vector<double> data(90, 1.0);
    for (int i = 0; i < 10; ++i) {
        data.push_back(2.0);
    }
    const auto [q25, q75] = jackknife_quantile_ci(data, 0.001, 5.0, 0.1);
    CHECK(q25 == q75);
}

TEST_CASE("jackknife reports the failing replicate") {
    // deleting the single distinct observation leaves a degenerate sample
    std::vector<double> data(20, 1.0);
    data.push_back(2.0);
    CHECK_THROWS_WITH_AS(jackknife_quantile_ci(data, 0.001, 5.0, 0.1),
                         doctest::Contains("replicate 20"), NumericError);
}

TEST_CASE("jackknife interval shrinks with sample size") {
    int wins = 0;
    std::vector<int> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 100);
    std::vector<double> widths_small(10), widths_large(10);
    parallel_for(10, [&](std::size_t s) {
        Rng rng(static_cast<std::uint64_t>(seeds[s]));
        const auto large = simulate_gpd(2000, 2.0, 0.1, rng);
        const std::vector<double> small(large.begin(), large.begin() + 200);
        const auto [a25, a75] = jackknife_quantile_ci(small, 0.001, 10.0, 0.05);
        const auto [b25, b75] = jackknife_quantile_ci(large, 0.001, 10.0, 0.05);
        widths_small[s] = a75 - a25;
        widths_large[s] = b75 - b25;
    });
    for (int s = 0; s < 10; ++s) {
        if (widths_large[s] < widths_small[s]) {
            ++wins;
        }
    }
    CHECK(wins >= 9);
}

TEST_CASE("bias study single replicate matches a by-hand recomputation") {
    GpdPrior prior;
    McmcConfig config;
    config.n_iter = 2000;
    config.burn_in = 500;
    config.seed = 777;
    const auto study = run_bias_study(1, 60, {11.0, 18.0}, {-0.15, 0.20}, prior, config);
    REQUIRE(study.residual_sigma.size() == 1);

    // replicate 0 by hand, following the documented seed derivation
    Rng rng(split_seed(777, 0));
    const double sigma_true = rng.uniform(11.0, 18.0);
    const double xi_true = rng.uniform(-0.15, 0.20);
    const auto data = simulate_gpd(60, sigma_true, xi_true, rng);
    McmcConfig rep = config;
    rep.seed = split_seed(777, 0x5eed0000ULL);
    const auto post = fit_gpd_bayes(data, prior, rep);
    const double residual = mean_of(post.sigma) - sigma_true;
    CHECK(study.residual_sigma[0] == residual);
    CHECK(study.mean_correction_sigma == -residual);
}

TEST_CASE("bias study is deterministic and order independent") {
    GpdPrior prior;
    McmcConfig config;
    config.n_iter = 1500;
    config.burn_in = 300;
    config.seed = 4242;
    const auto a = run_bias_study(16, 40, {11.0, 18.0}, {-0.15, 0.20}, prior, config);
    const auto b = run_bias_study(16, 40, {11.0, 18.0}, {-0.15, 0.20}, prior, config);
    CHECK(a.residual_sigma == b.residual_sigma);
    CHECK(a.residual_xi == b.residual_xi);
    CHECK(a.mean_correction_sigma == b.mean_correction_sigma);
    CHECK(a.n_failed == 0);
}

TEST_CASE("bias study residuals shrink at moderate n") {
    GpdPrior prior;
    McmcConfig config;
    config.n_iter = 3000;
    config.burn_in = 600;
    config.step_sigma = 0.03;
    config.step_xi = 0.03;
    config.seed = 2025;
    const auto study = run_bias_study(24, 20000, {11.0, 18.0}, {-0.15, 0.20}, prior, config);
    CHECK(study.n_failed == 0);
    CHECK(std::abs(mean_of(study.residual_sigma)) < 0.08);
    CHECK(std::abs(mean_of(study.residual_xi)) < 0.02);
}

TEST_CASE("bias corrections shift return levels as expected") {
    PosteriorSamples samples;
    samples.sigma = {14.0, 15.0, 16.0};
    samples.xi = {0.02, 0.05, 0.08};

    BiasStudyResult zero;
    zero.mean_correction_sigma = 0.0;
    zero.mean_correction_xi = 0.0;
    const auto same = apply_bias_correction(samples, zero, 110.0, 180.0 / 21000.0, 200.0, 300.0);
    CHECK(same.raw == same.shifted);
    CHECK(same.n_skipped == 0);

    BiasStudyResult up;
    up.mean_correction_sigma = 0.7;
    up.mean_correction_xi = 0.01;
    const auto shifted = apply_bias_correction(samples, up, 110.0, 180.0 / 21000.0, 200.0, 300.0);
    // positive corrections push the return level up
    CHECK(mean_of(shifted.shifted) > mean_of(shifted.raw));
    // single-draw identity: shifting the draw equals correcting the inputs
    const double direct = return_level(
        200.0, 300.0, {samples.sigma[1] + 0.7, samples.xi[1] + 0.01, 110.0, 180.0 / 21000.0});
    CHECK(shifted.shifted[1] == direct);

    BiasStudyResult harsh;
    harsh.mean_correction_sigma = -14.5; // pushes one sigma draw negative
    harsh.mean_correction_xi = 0.0;
    const auto skipped = apply_bias_correction(samples, harsh, 110.0, 180.0 / 21000.0, 200.0, 300.0);
    CHECK(skipped.n_skipped == 1);
    CHECK(skipped.shifted.size() == 2);
}
