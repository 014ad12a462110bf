#pragma once

#include <span>

namespace evt {

// Generalised Pareto tail of one margin: exceedances of threshold u have
// scale sigma and shape xi, and u itself is exceeded with probability zeta_u.
struct GpdParams {
    double sigma = 1.0;
    double xi = 0.0;
    double u = 0.0;
    double zeta_u = 1.0;

    // Throws std::invalid_argument if sigma <= 0 or zeta_u outside (0, 1].
    void validate() const;

    // Finite for xi < 0, +infinity otherwise.
    double upper_endpoint() const;
};

// Shape values below this magnitude use the exponential (xi -> 0) limits;
// the power-law forms lose all precision there to cancellation.
inline constexpr double kGpdShapeEps = 1e-8;

// P(Y > y) = zeta_u * (1 + xi (y-u)/sigma)_+^(-1/xi). Requires y >= u;
// returns 0 beyond a finite upper endpoint.
double gpd_survival(double y, const GpdParams& params);

// Upper-tail quantile: the y with P(Y > y) = p, for 0 < p <= zeta_u.
double gpd_quantile(double p, const GpdParams& params);

// Level exceeded on average once every T years given n_yr observations per
// year. Identical to gpd_quantile(1 / (T * n_yr)); requires T*n_yr*zeta_u > 1.
double return_level(double T, double n_yr, const GpdParams& params);

// Fraction of observations strictly above u. Zero when nothing exceeds;
// callers building GpdParams must reject that themselves.
double exceedance_prob(std::span<const double> data, double u);

// The competition loss is 9x steeper for under-estimates than over-estimates
// and zero within +-1% of the true quantile. The first branch of the printed
// formula mixes 0.9q and 0.99q, which goes negative on (0.9q, 0.99q);
// Corrected uses 0.99q in both places. Both variants agree outside that gap.
enum class LossVariant {
    AsPrinted,
    Corrected,
};

double challenge_loss(double q_true, double q_hat,
                      LossVariant variant = LossVariant::AsPrinted);

// exp(y / alpha): maps standard Gumbel to unit Frechet with shape alpha.
double gumbel_to_frechet(double y, double alpha);

// G^{-1}(p) = -log(-log p), for p in (0, 1).
double gumbel_quantile(double p);

// Phi_alpha^{-1}(p) = (-log p)^(-1/alpha), for p in (0, 1).
double frechet_quantile(double p, double alpha);

} // namespace evt
