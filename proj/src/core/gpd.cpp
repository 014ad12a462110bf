#include "core/gpd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/error.hpp"
#include "core/margins.hpp"
#include "core/mcmc.hpp"
#include "core/parallel.hpp"

namespace evt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_excesses(std::span<const double> excesses, std::size_t min_size) {
    if (excesses.size() < min_size) {
        throw std::invalid_argument("gpd fit: too few excesses");
    }
    for (double y : excesses) {
        if (!(y > 0.0) || !std::isfinite(y)) {
            throw std::invalid_argument("gpd fit: excesses must be positive and finite");
        }
    }
}

// Hosking-Wallis probability-weighted moments: b0 = mean,
// b1 = sum y_(i) (n-i)/(n(n-1)) over ascending order statistics, then
// xi = 2 - b0/(b0 - 2 b1), sigma = 2 b0 b1/(b0 - 2 b1).
std::pair<double, double> pwm_start(std::span<const double> excesses) {
    const std::size_t n = excesses.size();
    std::vector<double> sorted(excesses.begin(), excesses.end());
    std::sort(sorted.begin(), sorted.end());
    double b0 = 0.0;
    double b1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        b0 += sorted[i];
        b1 += sorted[i] * static_cast<double>(n - 1 - i);
    }
    b0 /= static_cast<double>(n);
    b1 /= static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom = b0 - 2.0 * b1;
    double sigma = b0;
    double xi = 0.1;
    if (denom > 0.0) {
        xi = 2.0 - b0 / denom;
        sigma = 2.0 * b0 * b1 / denom;
    }
    xi = std::clamp(xi, -0.9, 0.9);
    if (!(sigma > 0.0)) {
        sigma = b0;
    }
    return {sigma, xi};
}

// Nelder-Mead minimisation in 2-D. Small and self-contained; the GPD
// log-likelihood surface is smooth on its feasible region.
struct NelderMeadResult {
    std::array<double, 2> x;
    double value;
    bool converged;
};

template <typename F>
NelderMeadResult nelder_mead_2d(F f, std::array<double, 2> x0, double scale,
                                int max_iter, double tol) {
    using Point = std::array<double, 2>;
    std::array<Point, 3> v{Point{x0[0], x0[1]},
                           Point{x0[0] + scale, x0[1]},
                           Point{x0[0], x0[1] + scale}};
    std::array<double, 3> fv{f(v[0]), f(v[1]), f(v[2])};

    auto order = [&] {
        if (fv[0] > fv[1]) { std::swap(fv[0], fv[1]); std::swap(v[0], v[1]); }
        if (fv[1] > fv[2]) { std::swap(fv[1], fv[2]); std::swap(v[1], v[2]); }
        if (fv[0] > fv[1]) { std::swap(fv[0], fv[1]); std::swap(v[0], v[1]); }
    };

    int it = 0;
    for (; it < max_iter; ++it) {
        order();
        const double spread = std::max(std::abs(fv[2] - fv[0]),
                                       std::max(std::abs(v[2][0] - v[0][0]),
                                                std::abs(v[2][1] - v[0][1])));
        if (spread < tol) {
            return {v[0], fv[0], true};
        }
        const Point centroid{(v[0][0] + v[1][0]) / 2.0, (v[0][1] + v[1][1]) / 2.0};
        auto blend = [&](double t) {
            return Point{centroid[0] + t * (v[2][0] - centroid[0]),
                         centroid[1] + t * (v[2][1] - centroid[1])};
        };
        const Point refl = blend(-1.0);
        const double f_refl = f(refl);
        if (f_refl < fv[0]) {
            const Point exp_pt = blend(-2.0);
            const double f_exp = f(exp_pt);
            if (f_exp < f_refl) {
                v[2] = exp_pt; fv[2] = f_exp;
            } else {
                v[2] = refl; fv[2] = f_refl;
            }
        } else if (f_refl < fv[1]) {
            v[2] = refl; fv[2] = f_refl;
        } else {
            const Point contr = blend(f_refl < fv[2] ? -0.5 : 0.5);
            const double f_contr = f(contr);
            if (f_contr < std::min(f_refl, fv[2])) {
                v[2] = contr; fv[2] = f_contr;
            } else {
                // shrink towards the best vertex
                for (int k = 1; k < 3; ++k) {
                    v[k] = Point{v[0][0] + 0.5 * (v[k][0] - v[0][0]),
                                 v[0][1] + 0.5 * (v[k][1] - v[0][1])};
                    fv[k] = f(v[k]);
                }
            }
        }
    }
    order();
    return {v[0], fv[0], false};
}

} // namespace

void GpdPrior::validate() const {
    if (!(sigma_shape > 0.0) || !(sigma_rate > 0.0) || !(xi_sd > 0.0)) {
        throw std::invalid_argument("GpdPrior: shape, rate and xi_sd must be positive");
    }
}

void McmcConfig::validate() const {
    if (n_iter <= 0 || burn_in < 0 || burn_in >= n_iter) {
        throw std::invalid_argument("McmcConfig: need 0 <= burn_in < n_iter");
    }
    if (!(step_sigma > 0.0) || !(step_xi > 0.0)) {
        throw std::invalid_argument("McmcConfig: step sizes must be positive");
    }
}

double gpd_log_likelihood(std::span<const double> excesses, double sigma, double xi) {
    if (excesses.empty()) {
        throw std::invalid_argument("gpd_log_likelihood: empty excesses");
    }
    if (!(sigma > 0.0)) {
        return kNegInf;
    }
    const double log_sigma = std::log(sigma);
    double ll = 0.0;
    if (std::abs(xi) < kGpdShapeEps) {
        for (double y : excesses) {
            ll += -log_sigma - y / sigma;
        }
        return ll;
    }
    const double c = 1.0 / xi + 1.0;
    for (double y : excesses) {
        const double base = 1.0 + xi * y / sigma;
        if (base <= 0.0) {
            return kNegInf;
        }
        ll += -log_sigma - c * std::log1p(xi * y / sigma);
    }
    return ll;
}

MleFit fit_gpd_mle(std::span<const double> excesses) {
    check_excesses(excesses, 10);
    const auto [mn, mx] = std::minmax_element(excesses.begin(), excesses.end());
    if (*mn == *mx) {
        throw NumericError("fit_gpd_mle: degenerate data (all excesses equal)");
    }

    // The likelihood is unbounded for xi <= -1 (density spikes at the sample
    // maximum); the MLE is only meaningful on xi > -1.
    auto neg_ll = [&](std::array<double, 2> t) {
        const double sigma = std::exp(t[0]);
        const double xi = t[1];
        if (xi <= -1.0 + 1e-10) {
            return std::numeric_limits<double>::infinity();
        }
        const double ll = gpd_log_likelihood(excesses, sigma, xi);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    auto [sigma0, xi0] = pwm_start(excesses);
    // Ensure the start is feasible: xi >= 0 always is.
    if (!std::isfinite(gpd_log_likelihood(excesses, sigma0, xi0))) {
        xi0 = 0.1;
    }
    const auto result =
        nelder_mead_2d(neg_ll, {std::log(sigma0), xi0}, 0.2, 2000, 1e-11);
    if (!result.converged) {
        throw NumericError("fit_gpd_mle: optimizer did not converge");
    }

    MleFit fit;
    fit.sigma = std::exp(result.x[0]);
    fit.xi = result.x[1];
    fit.log_lik = -result.value;

    // Observed information by central differences on (sigma, xi).
    const double hs = std::max(1e-5 * fit.sigma, 1e-9);
    const double hx = 1e-5;
    auto ll = [&](double s, double x) { return gpd_log_likelihood(excesses, s, x); };
    const double f0 = ll(fit.sigma, fit.xi);
    const double dss = (ll(fit.sigma + hs, fit.xi) - 2.0 * f0 + ll(fit.sigma - hs, fit.xi)) / (hs * hs);
    const double dxx = (ll(fit.sigma, fit.xi + hx) - 2.0 * f0 + ll(fit.sigma, fit.xi - hx)) / (hx * hx);
    const double dsx = (ll(fit.sigma + hs, fit.xi + hx) - ll(fit.sigma + hs, fit.xi - hx) -
                        ll(fit.sigma - hs, fit.xi + hx) + ll(fit.sigma - hs, fit.xi - hx)) /
                       (4.0 * hs * hx);
    const double det = dss * dxx - dsx * dsx;
    if (std::isfinite(det) && det > 0.0 && dss < 0.0) {
        fit.se_sigma = std::sqrt(-dxx / det);
        fit.se_xi = std::sqrt(-dss / det);
    } else {
        fit.se_sigma = std::numeric_limits<double>::quiet_NaN();
        fit.se_xi = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

PosteriorSamples fit_gpd_bayes(std::span<const double> excesses, const GpdPrior& prior,
                               const McmcConfig& config, bool use_likelihood) {
    prior.validate();
    config.validate();
    if (use_likelihood) {
        check_excesses(excesses, 10);
    }

    // Log posterior on (t, xi) with t = log sigma; the Jacobian of the
    // transform adds one extra factor of sigma to the Gamma prior term.
    auto log_target = [&](const std::vector<double>& state) {
        const double t = state[0];
        const double xi = state[1];
        const double sigma = std::exp(t);
        double lp = prior.sigma_shape * t - prior.sigma_rate * sigma;
        const double z = (xi - prior.xi_mean) / prior.xi_sd;
        lp += -0.5 * z * z;
        if (use_likelihood) {
            const double ll = gpd_log_likelihood(excesses, sigma, xi);
            if (!std::isfinite(ll)) {
                return kNegInf;
            }
            lp += ll;
        }
        return lp;
    };

    std::vector<double> init;
    if (use_likelihood) {
        auto [sigma0, xi0] = pwm_start(excesses);
        if (!std::isfinite(gpd_log_likelihood(excesses, sigma0, xi0))) {
            xi0 = 0.1;
        }
        init = {std::log(sigma0), xi0};
    } else {
        init = {std::log(prior.sigma_shape / prior.sigma_rate), prior.xi_mean};
    }

    const auto chain = random_walk_metropolis(log_target, std::move(init),
                                              {config.step_sigma, config.step_xi},
                                              config.n_iter, config.burn_in, config.seed);

    PosteriorSamples out;
    out.sigma.reserve(chain.samples.size());
    out.xi.reserve(chain.samples.size());
    for (const auto& s : chain.samples) {
        out.sigma.push_back(std::exp(s[0]));
        out.xi.push_back(s[1]);
    }
    out.acceptance_rate = chain.acceptance_rate;
    return out;
}

std::pair<double, double> jackknife_quantile_ci(std::span<const double> excesses,
                                                double p, double u, double zeta_u) {
    check_excesses(excesses, 20);
    const std::size_t n = excesses.size();
    std::vector<double> quantiles(n);
    std::vector<double> held_out(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                held_out[w++] = excesses[j];
            }
        }
        try {
            const MleFit fit = fit_gpd_mle(held_out);
            quantiles[i] = gpd_quantile(p, {fit.sigma, fit.xi, u, zeta_u});
        } catch (const std::exception& e) {
            throw NumericError("jackknife_quantile_ci: replicate " + std::to_string(i) +
                               " failed: " + e.what());
        }
    }

    std::sort(quantiles.begin(), quantiles.end());
    // Linear interpolation between order statistics (the common "type 7").
    auto percentile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = pos - static_cast<double>(lo);
        return quantiles[lo] * (1.0 - frac) + quantiles[hi] * frac;
    };
    return {percentile(0.25), percentile(0.75)};
}

std::vector<double> simulate_gpd(int n, double sigma, double xi, Rng& rng) {
    if (n < 1 || !(sigma > 0.0)) {
        throw std::invalid_argument("simulate_gpd: need n >= 1 and sigma > 0");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& y : out) {
        const double s = rng.uniform(); // survival probability
        if (std::abs(xi) < kGpdShapeEps) {
            y = -sigma * std::log(s);
        } else {
            y = sigma / xi * std::expm1(-xi * std::log(s));
        }
    }
    return out;
}

BiasStudyResult run_bias_study(int n_sim, int n_points,
                               std::pair<double, double> sigma_range,
                               std::pair<double, double> xi_range,
                               const GpdPrior& prior, const McmcConfig& config) {
    if (n_sim < 1 || n_points < 10) {
        throw std::invalid_argument("run_bias_study: need n_sim >= 1, n_points >= 10");
    }
    prior.validate();
    config.validate();

    struct Replicate {
        double res_sigma = 0.0;
        double res_xi = 0.0;
        bool ok = false;
    };
    std::vector<Replicate> reps(static_cast<std::size_t>(n_sim));

    parallel_for(static_cast<std::size_t>(n_sim), [&](std::size_t i) {
        Rng rng(split_seed(config.seed, i));
        const double sigma_true = rng.uniform(sigma_range.first, sigma_range.second);
        const double xi_true = rng.uniform(xi_range.first, xi_range.second);
        const auto data = simulate_gpd(n_points, sigma_true, xi_true, rng);
        McmcConfig rep_config = config;
        rep_config.seed = split_seed(config.seed, i + 0x5eed0000ULL);
        try {
            const auto post = fit_gpd_bayes(data, prior, rep_config);
            double mean_sigma = 0.0;
            double mean_xi = 0.0;
            for (std::size_t j = 0; j < post.sigma.size(); ++j) {
                mean_sigma += post.sigma[j];
                mean_xi += post.xi[j];
            }
            mean_sigma /= static_cast<double>(post.sigma.size());
            mean_xi /= static_cast<double>(post.xi.size());
            reps[i] = {mean_sigma - sigma_true, mean_xi - xi_true, true};
        } catch (const std::exception&) {
            reps[i].ok = false;
        }
    });

    BiasStudyResult out;
    for (const auto& r : reps) {
        if (r.ok) {
            out.residual_sigma.push_back(r.res_sigma);
            out.residual_xi.push_back(r.res_xi);
        } else {
            ++out.n_failed;
        }
    }
    if (out.residual_sigma.empty()) {
        throw NumericError("run_bias_study: every replicate failed");
    }
    double sum_s = 0.0;
    double sum_x = 0.0;
    for (std::size_t i = 0; i < out.residual_sigma.size(); ++i) {
        sum_s += out.residual_sigma[i];
        sum_x += out.residual_xi[i];
    }
    out.mean_correction_sigma = -sum_s / static_cast<double>(out.residual_sigma.size());
    out.mean_correction_xi = -sum_x / static_cast<double>(out.residual_xi.size());
    return out;
}

CorrectionResult apply_bias_correction(const PosteriorSamples& samples,
                                       const BiasStudyResult& study, double u,
                                       double zeta_u, double T, double n_yr) {
    if (samples.sigma.empty() || samples.sigma.size() != samples.xi.size()) {
        throw std::invalid_argument("apply_bias_correction: empty or inconsistent samples");
    }
    CorrectionResult out;
    out.raw.reserve(samples.sigma.size());
    out.shifted.reserve(samples.sigma.size());
    for (std::size_t i = 0; i < samples.sigma.size(); ++i) {
        out.raw.push_back(
            return_level(T, n_yr, {samples.sigma[i], samples.xi[i], u, zeta_u}));
        const double sigma_c = samples.sigma[i] + study.mean_correction_sigma;
        const double xi_c = samples.xi[i] + study.mean_correction_xi;
        if (!(sigma_c > 0.0)) {
            ++out.n_skipped;
            continue;
        }
        out.shifted.push_back(return_level(T, n_yr, {sigma_c, xi_c, u, zeta_u}));
    }
    return out;
}

} // namespace evt
