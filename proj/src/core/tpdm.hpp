#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/max_linear.hpp"

namespace evt {

// Pseudo-polar view of a data matrix: radii r_t = ||x_t||_alpha and angles
// theta_t = x_t / r_t, plus the permutation sorting radii in descending
// order (ties broken by original row index).
struct PolarSample {
    std::vector<double> radii;
    Matrix angles;
    double alpha = 1.0;
    std::vector<std::size_t> order;

    std::size_t size() const { return radii.size(); }
    std::size_t dim() const { return angles.cols(); }

    // Radius of the j-th largest observation, 1-based.
    double radius_at_rank(std::size_t j) const { return radii[order[j - 1]]; }
};

// Requires every row to have at least one positive entry; offending rows are
// listed in the error message.
PolarSample polar_decompose(const Matrix& data, double alpha);

// Column j is (d/k)^(1/alpha) times the angle of the j-th largest
// observation. The induced angular measure is the empirical angular measure
// with mass d/k per atom.
MaxLinearModel empirical_A(const PolarSample& sample, std::size_t k);

struct Tpdm {
    Matrix sigma; // symmetric d x d, entrywise nonnegative
    std::size_t dim() const { return sigma.rows(); }
};

// A_hat * A_hat^T for alpha = 2 (second angular moments of the extremes).
Tpdm empirical_tpdm(const PolarSample& sample, std::size_t k);

// Euclidean projection onto the L1-simplex by sort-based thresholding:
// w_i = max(v_i - tau, 0) with tau chosen so the result sums to one.
// Components below tau come out exactly zero.
std::vector<double> simplex_project(std::span<const double> v);

// Column j is (d/k) * project(x_(j) / r_(k+1)): the k largest observations,
// rescaled by the (k+1)-th radius and projected onto the simplex. The
// projections can land on simplex boundaries, so the induced measure puts
// mass on lower-dimensional subspaces that the plain empirical estimate
// never reaches. Requires alpha = 1 and k < n.
MaxLinearModel sparse_empirical_A(const PolarSample& sample, std::size_t k);

// Merges columns with bitwise-identical normalized angles into one column of
// combined weight. The induced angular measure is unchanged; exact matching
// keeps coincident boundary atoms together without disturbing interior ones.
MaxLinearModel compress_columns(const MaxLinearModel& model);

struct CpFailure {
    std::size_t step = 0;  // 1-based elimination step
    std::size_t row = 0;   // 0-based position of the offending entry
    std::size_t col = 0;
    double value = 0.0;
    std::string describe() const;
};

struct CpOutcome {
    std::optional<MaxLinearModel> factor; // alpha = 2
    std::optional<CpFailure> failure;
    bool ok() const { return factor.has_value(); }
};

// Pivoted outer-product elimination: step j takes pivot path[j], emits the
// column S[., pivot]/sqrt(S[pivot, pivot]) restricted to not-yet-eliminated
// indices, and subtracts its outer product. Residual entries below -1e-12
// make the path infeasible (expected for some paths, not an error); entries
// in [-1e-12, 0) are rounding debris and clamp to zero. Zero-mass pivots
// with an all-zero remaining row emit nothing, so rank-deficient inputs
// yield fewer than d columns.
CpOutcome cp_decompose(const Tpdm& tpdm, std::span<const std::size_t> path);

// Uniformly random paths until n_cp feasible decompositions are collected.
// Attempt seeds derive from (seed, attempt index); output order is by
// attempt index. Throws NumericError when the retry budget runs out.
std::vector<MaxLinearModel> random_cp_ensemble(const Tpdm& tpdm, std::size_t n_cp,
                                               std::uint64_t seed);

} // namespace evt
