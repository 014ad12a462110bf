#include "core/margins.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace evt {

void GpdParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("GpdParams: sigma must be positive");
    }
    if (!std::isfinite(xi) || !std::isfinite(u)) {
        throw std::invalid_argument("GpdParams: xi and u must be finite");
    }
    if (!(zeta_u > 0.0) || zeta_u > 1.0) {
        throw std::invalid_argument("GpdParams: zeta_u must lie in (0, 1]");
    }
}

double GpdParams::upper_endpoint() const {
    if (xi < 0.0) {
        return u - sigma / xi;
    }
    return std::numeric_limits<double>::infinity();
}

double gpd_survival(double y, const GpdParams& params) {
    params.validate();
    if (!(y >= params.u)) {
        throw std::invalid_argument("gpd_survival: y below threshold");
    }
    const double t = (y - params.u) / params.sigma;
    if (std::abs(params.xi) < kGpdShapeEps) {
        return params.zeta_u * std::exp(-t);
    }
    const double base = 1.0 + params.xi * t;
    if (base <= 0.0) {
        return 0.0; // beyond the finite upper endpoint
    }
    return params.zeta_u * std::pow(base, -1.0 / params.xi);
}

double gpd_quantile(double p, const GpdParams& params) {
    params.validate();
    if (!(p > 0.0) || p > params.zeta_u) {
        throw std::invalid_argument("gpd_quantile: p must lie in (0, zeta_u]");
    }
    const double log_ratio = std::log(p / params.zeta_u);
    if (std::abs(params.xi) < kGpdShapeEps) {
        return params.u - params.sigma * log_ratio;
    }
    // (p/zeta)^(-xi) - 1 via expm1 keeps precision as xi -> 0.
    return params.u + params.sigma / params.xi * std::expm1(-params.xi * log_ratio);
}

double return_level(double T, double n_yr, const GpdParams& params) {
    params.validate();
    if (!(T > 0.0) || !(n_yr >= 1.0)) {
        throw std::invalid_argument("return_level: need T > 0 and n_yr >= 1");
    }
    if (!(T * n_yr * params.zeta_u > 1.0)) {
        throw std::invalid_argument(
            "return_level: threshold exceeded less than once per T years");
    }
    return gpd_quantile(1.0 / (T * n_yr), params);
}

double exceedance_prob(std::span<const double> data, double u) {
    if (data.empty()) {
        throw std::invalid_argument("exceedance_prob: empty data");
    }
    std::size_t count = 0;
    for (double x : data) {
        if (x > u) {
            ++count;
        }
    }
    return static_cast<double>(count) / static_cast<double>(data.size());
}

double challenge_loss(double q_true, double q_hat, LossVariant variant) {
    if (!(q_true > 0.0)) {
        throw std::invalid_argument("challenge_loss: q_true must be positive");
    }
    if (std::abs(q_true - q_hat) <= 0.01 * q_true) {
        return 0.0;
    }
    if (q_hat < 0.99 * q_true) {
        const double anchor = variant == LossVariant::AsPrinted ? 0.9 : 0.99;
        return 0.9 * (anchor * q_true - q_hat);
    }
    return 0.1 * (q_hat - 1.01 * q_true);
}

double gumbel_to_frechet(double y, double alpha) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("gumbel_to_frechet: alpha must be positive");
    }
    return std::exp(y / alpha);
}

double gumbel_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("gumbel_quantile: p must lie in (0, 1)");
    }
    return -std::log(-std::log(p));
}

double frechet_quantile(double p, double alpha) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("frechet_quantile: p must lie in (0, 1)");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("frechet_quantile: alpha must be positive");
    }
    return std::pow(-std::log(p), -1.0 / alpha);
}

} // namespace evt
