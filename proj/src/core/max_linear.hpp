#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace evt {

// X_i = max_j a_ij Z_j with Z_j independent unit Frechet(alpha). The d x q
// coefficient matrix is entrywise nonnegative and immutable once built.
struct MaxLinearModel {
    Matrix A;           // d rows, q columns
    double alpha = 1.0; // tail index

    std::size_t dim() const { return A.rows(); }
    std::size_t n_cols() const { return A.cols(); }

    // Shape/nonnegativity checks plus "no all-zero column". Estimators call
    // this on everything they return.
    void validate() const;

    // Additionally rejects all-zero rows (margins with no tail mass), the
    // full contract expected of user-supplied models.
    void validate_strict() const;
};

// C_{beta,u}: components in beta exceed their thresholds while the others
// stay below the caps. Caps are kept for Monte Carlo and diagnostics; the
// limit formula ignores them.
struct FailureRegion {
    std::vector<std::size_t> beta; // 0-based component indices
    std::vector<double> u;         // thresholds, aligned with beta
    std::vector<double> l;         // caps for beta-complement in ascending index
                                   // order; empty or +inf entries mean uncapped

    void validate(std::size_t d) const;
    std::vector<std::size_t> complement(std::size_t d) const;
};

struct AngularAtom {
    double weight = 0.0;
    std::vector<double> angle; // on the unit L_alpha simplex
};

struct AngularMeasure {
    std::vector<AngularAtom> atoms;
    double total_mass() const;
};

std::vector<double> max_linear_transform(const MaxLinearModel& model,
                                         std::span<const double> z);

// n x d sample; innovations are drawn by inverse CDF, z = (-log U)^(-1/alpha).
Matrix sample_max_linear(const MaxLinearModel& model, std::size_t n,
                         std::uint64_t seed);

// One atom per column: weight ||a_j||_alpha^alpha at angle a_j/||a_j||_alpha.
// Duplicate angles are not merged (see compress_columns).
AngularMeasure angular_measure_of(const MaxLinearModel& model);

struct TailProb {
    double value = 0.0; // clamped to [0, 1]
    double raw = 0.0;   // unclamped formula value
    bool clamped = false;
};

// Limit approximation of P(X in C_{beta,u}): columns whose normalized form
// lies in C_beta (components > zero_tol on beta, <= zero_tol off it)
// contribute min_i (a_{beta_i, j}/u_i)^alpha. Caps do not enter.
TailProb failure_prob_approx(const MaxLinearModel& model, const FailureRegion& region,
                             double zero_tol = 0.0);

// H_X(C_beta) / (s * u) for alpha = 1 and a common scalar threshold; an upper
// bound on the formula value, tight only when all C_beta mass sits at the
// centroid.
double failure_prob_upper_bound(const MaxLinearModel& model, const FailureRegion& region,
                                double zero_tol = 0.0);

// Product over independent clusters of failure_prob_approx; errors are
// annotated with the offending cluster index.
TailProb product_rule_prob(std::span<const MaxLinearModel> models,
                           std::span<const FailureRegion> regions,
                           double zero_tol = 0.0);

// For independent margins, the factor by which finite caps shrink the
// uncapped probability: prod over capped components of Phi_alpha(l_i).
// Quantifies what the limit formula neglects.
double cap_factor_independent(const FailureRegion& region, std::size_t d, double alpha);

} // namespace evt
