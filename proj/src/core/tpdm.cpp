#include "core/tpdm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace evt {

namespace {

constexpr double kCpClampTol = 1e-12;

double lp_norm(std::span<const double> v, double alpha) {
    if (alpha == 1.0) {
        return std::accumulate(v.begin(), v.end(), 0.0);
    }
    if (alpha == 2.0) {
        double s = 0.0;
        for (double x : v) {
            s += x * x;
        }
        return std::sqrt(s);
    }
    double s = 0.0;
    for (double x : v) {
        s += std::pow(x, alpha);
    }
    return std::pow(s, 1.0 / alpha);
}

void check_k(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("k must lie in [1, n]");
    }
}

} // namespace

PolarSample polar_decompose(const Matrix& data, double alpha) {
    if (data.rows() < 1 || data.cols() < 1) {
        throw std::invalid_argument("polar_decompose: empty data");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("polar_decompose: alpha must be positive");
    }
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();

    std::string zero_rows;
    for (std::size_t t = 0; t < n; ++t) {
        bool any = false;
        for (double x : data.row(t)) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw std::invalid_argument("polar_decompose: entries must be nonnegative and finite");
            }
            if (x > 0.0) {
                any = true;
            }
        }
        if (!any) {
            zero_rows += zero_rows.empty() ? "" : ", ";
            zero_rows += std::to_string(t + 1);
        }
    }
    if (!zero_rows.empty()) {
        throw std::invalid_argument("polar_decompose: all-zero rows: " + zero_rows);
    }

    PolarSample sample;
    sample.alpha = alpha;
    sample.radii.resize(n);
    sample.angles = Matrix(n, d);
    for (std::size_t t = 0; t < n; ++t) {
        const double r = lp_norm(data.row(t), alpha);
        sample.radii[t] = r;
        for (std::size_t i = 0; i < d; ++i) {
            sample.angles(t, i) = data(t, i) / r;
        }
    }
    sample.order.resize(n);
    std::iota(sample.order.begin(), sample.order.end(), std::size_t{0});
    std::stable_sort(sample.order.begin(), sample.order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return sample.radii[a] > sample.radii[b];
                     });
    return sample;
}

MaxLinearModel empirical_A(const PolarSample& sample, std::size_t k) {
    check_k(k, sample.size());
    const std::size_t d = sample.dim();
    const double scale = std::pow(static_cast<double>(d) / static_cast<double>(k),
                                  1.0 / sample.alpha);
    MaxLinearModel model;
    model.alpha = sample.alpha;
    model.A = Matrix(d, k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto angle = sample.angles.row(sample.order[j]);
        for (std::size_t i = 0; i < d; ++i) {
            model.A(i, j) = scale * angle[i];
        }
    }
    model.validate();
    return model;
}

Tpdm empirical_tpdm(const PolarSample& sample, std::size_t k) {
    if (sample.alpha != 2.0) {
        throw std::invalid_argument("empirical_tpdm: requires alpha = 2");
    }
    check_k(k, sample.size());
    return {empirical_A(sample, k).A.times_transpose()};
}

std::vector<double> simplex_project(std::span<const double> v) {
    const std::size_t d = v.size();
    if (d == 0) {
        throw std::invalid_argument("simplex_project: empty vector");
    }
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("simplex_project: components must be nonnegative and finite");
        }
    }
    // Points already on the simplex (up to summation rounding) are fixed
    // points; returning them unchanged keeps repeated projection bitwise
    // stable.
    double total = 0.0;
    for (double x : v) {
        total += x;
    }
    if (std::abs(total - 1.0) <= 1e-12) {
        return {v.begin(), v.end()};
    }
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    // Largest rho with sorted[rho-1] > (cumsum(rho) - 1)/rho; always exists
    // since rho = 1 gives sorted[0] > sorted[0] - 1.
    double cumsum = 0.0;
    double tau = 0.0;
    for (std::size_t rho = 1; rho <= d; ++rho) {
        cumsum += sorted[rho - 1];
        const double candidate = (cumsum - 1.0) / static_cast<double>(rho);
        if (sorted[rho - 1] > candidate) {
            tau = candidate;
        }
    }
    std::vector<double> out(d);
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = std::max(v[i] - tau, 0.0);
    }
    return out;
}

MaxLinearModel sparse_empirical_A(const PolarSample& sample, std::size_t k) {
    if (sample.alpha != 1.0) {
        throw std::invalid_argument("sparse_empirical_A: requires alpha = 1");
    }
    if (k < 1 || k >= sample.size()) {
        throw std::invalid_argument("sparse_empirical_A: need 1 <= k < n (scaling radius is r_(k+1))");
    }
    const std::size_t d = sample.dim();
    const double r_next = sample.radius_at_rank(k + 1);
    const double scale = static_cast<double>(d) / static_cast<double>(k);
    MaxLinearModel model;
    model.alpha = 1.0;
    model.A = Matrix(d, k);
    std::vector<double> scaled(d);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t t = sample.order[j];
        const double ratio = sample.radii[t] / r_next;
        for (std::size_t i = 0; i < d; ++i) {
            scaled[i] = sample.angles(t, i) * ratio;
        }
        const auto projected = simplex_project(scaled);
        for (std::size_t i = 0; i < d; ++i) {
            model.A(i, j) = scale * projected[i];
        }
    }
    model.validate();
    return model;
}

MaxLinearModel compress_columns(const MaxLinearModel& model) {
    model.validate();
    const std::size_t d = model.dim();
    // Group by normalized angle, exact componentwise equality. Keyed on the
    // raw vector; first-seen order is preserved for the output columns.
    std::map<std::vector<double>, double> groups;
    std::vector<const std::vector<double>*> first_seen;
    std::vector<double> col(d);
    for (std::size_t j = 0; j < model.n_cols(); ++j) {
        for (std::size_t i = 0; i < d; ++i) {
            col[i] = model.A(i, j);
        }
        const double norm = lp_norm(col, model.alpha);
        std::vector<double> angle(d);
        for (std::size_t i = 0; i < d; ++i) {
            angle[i] = col[i] / norm;
        }
        const double weight = std::pow(norm, model.alpha);
        auto [it, inserted] = groups.try_emplace(std::move(angle), 0.0);
        it->second += weight;
        if (inserted) {
            first_seen.push_back(&it->first);
        }
    }
    MaxLinearModel out;
    out.alpha = model.alpha;
    out.A = Matrix(d, first_seen.size());
    for (std::size_t j = 0; j < first_seen.size(); ++j) {
        const auto& angle = *first_seen[j];
        const double scale = std::pow(groups[angle], 1.0 / model.alpha);
        for (std::size_t i = 0; i < d; ++i) {
            out.A(i, j) = scale * angle[i];
        }
    }
    out.validate();
    return out;
}

std::string CpFailure::describe() const {
    return "infeasible at step " + std::to_string(step) + ": entry (" +
           std::to_string(row + 1) + ", " + std::to_string(col + 1) + ") = " +
           std::to_string(value);
}

CpOutcome cp_decompose(const Tpdm& tpdm, std::span<const std::size_t> path) {
    const std::size_t d = tpdm.dim();
    if (d < 1 || tpdm.sigma.cols() != d) {
        throw std::invalid_argument("cp_decompose: matrix must be square and nonempty");
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!(tpdm.sigma(i, j) > 0.0)) {
                throw std::invalid_argument("cp_decompose: matrix must be strictly positive");
            }
            if (std::abs(tpdm.sigma(i, j) - tpdm.sigma(j, i)) > 1e-12) {
                throw std::invalid_argument("cp_decompose: matrix must be symmetric");
            }
        }
    }
    if (path.size() != d) {
        throw std::invalid_argument("cp_decompose: path length must equal the dimension");
    }
    std::vector<bool> used(d, false);
    for (std::size_t i : path) {
        if (i >= d || used[i]) {
            throw std::invalid_argument("cp_decompose: path must be a permutation");
        }
        used[i] = true;
    }

    Matrix s = tpdm.sigma;
    std::vector<bool> eliminated(d, false);
    std::vector<std::vector<double>> columns;
    for (std::size_t step = 0; step < d; ++step) {
        const std::size_t pivot = path[step];
        const double diag = s(pivot, pivot);
        if (diag <= 0.0) {
            // Acceptable only if nothing is left to explain in this row.
            bool all_zero = true;
            for (std::size_t m = 0; m < d; ++m) {
                if (!eliminated[m] && s(m, pivot) != 0.0) {
                    all_zero = false;
                    break;
                }
            }
            if (all_zero) {
                eliminated[pivot] = true;
                continue; // zero-mass column, dropped from the factor
            }
            CpOutcome out;
            out.failure = CpFailure{step + 1, pivot, pivot, diag};
            return out;
        }
        const double root = std::sqrt(diag);
        std::vector<double> column(d, 0.0);
        for (std::size_t m = 0; m < d; ++m) {
            if (!eliminated[m]) {
                column[m] = s(m, pivot) / root;
            }
        }
        for (std::size_t m = 0; m < d; ++m) {
            if (eliminated[m]) {
                continue;
            }
            for (std::size_t w = 0; w < d; ++w) {
                if (eliminated[w]) {
                    continue;
                }
                double value = s(m, w) - column[m] * column[w];
                if (value < -kCpClampTol) {
                    CpOutcome out;
                    out.failure = CpFailure{step + 1, m, w, value};
                    return out;
                }
                // rounding debris of either sign collapses to an exact zero,
                // so exhausted residuals terminate with zero-mass pivots
                if (std::abs(value) <= kCpClampTol) {
                    value = 0.0;
                }
                s(m, w) = value;
            }
        }
        eliminated[pivot] = true;
        columns.push_back(std::move(column));
    }

    MaxLinearModel factor;
    factor.alpha = 2.0;
    factor.A = Matrix(d, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < d; ++i) {
            factor.A(i, j) = columns[j][i];
        }
    }
    factor.validate();
    CpOutcome out;
    out.factor = std::move(factor);
    return out;
}

std::vector<MaxLinearModel> random_cp_ensemble(const Tpdm& tpdm, std::size_t n_cp,
                                               std::uint64_t seed) {
    if (n_cp < 1) {
        throw std::invalid_argument("random_cp_ensemble: n_cp must be >= 1");
    }
    const std::size_t budget = std::max<std::size_t>(1000, 100 * n_cp);
    std::vector<MaxLinearModel> out;
    out.reserve(n_cp);
    std::size_t attempts = 0;
    for (; attempts < budget && out.size() < n_cp; ++attempts) {
        Rng rng(split_seed(seed, attempts));
        const auto path = random_permutation(tpdm.dim(), rng);
        auto outcome = cp_decompose(tpdm, path);
        if (outcome.ok()) {
            out.push_back(std::move(*outcome.factor));
        }
    }
    if (out.size() < n_cp) {
        const double rate = 1.0 - static_cast<double>(out.size()) / static_cast<double>(attempts);
        throw NumericError("random_cp_ensemble: retry budget exhausted after " +
                           std::to_string(attempts) + " attempts (failure rate " +
                           std::to_string(rate) + ")");
    }
    return out;
}

} // namespace evt
