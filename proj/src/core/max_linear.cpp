#include "core/max_linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "core/rng.hpp"

namespace evt {

namespace {

double norm_alpha(std::span<const double> v, double alpha) {
    if (alpha == 1.0) {
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s;
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

} // namespace

void MaxLinearModel::validate() const {
    if (A.rows() < 1 || A.cols() < 1) {
        throw std::invalid_argument("MaxLinearModel: empty coefficient matrix");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("MaxLinearModel: alpha must be positive");
    }
    for (double x : A.data()) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("MaxLinearModel: entries must be nonnegative and finite");
        }
    }
    for (std::size_t j = 0; j < A.cols(); ++j) {
        bool any = false;
        for (std::size_t i = 0; i < A.rows(); ++i) {
            if (A(i, j) > 0.0) {
                any = true;
                break;
            }
        }
        if (!any) {
            throw std::invalid_argument("MaxLinearModel: column " + std::to_string(j + 1) +
                                        " has no positive entry");
        }
    }
}

void MaxLinearModel::validate_strict() const {
    validate();
    for (std::size_t i = 0; i < A.rows(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < A.cols(); ++j) {
            if (A(i, j) > 0.0) {
                any = true;
                break;
            }
        }
        if (!any) {
            throw std::invalid_argument("MaxLinearModel: row " + std::to_string(i + 1) +
                                        " has no positive entry");
        }
    }
}

void FailureRegion::validate(std::size_t d) const {
    if (beta.empty()) {
        throw std::invalid_argument("FailureRegion: beta must be nonempty");
    }
    std::vector<bool> seen(d, false);
    for (std::size_t i : beta) {
        if (i >= d) {
            throw std::invalid_argument("FailureRegion: index out of range");
        }
        if (seen[i]) {
            throw std::invalid_argument("FailureRegion: duplicate index in beta");
        }
        seen[i] = true;
    }
    if (u.size() != beta.size()) {
        throw std::invalid_argument("FailureRegion: u must align with beta");
    }
    for (double x : u) {
        if (!(x > 0.0)) {
            throw std::invalid_argument("FailureRegion: thresholds must be positive");
        }
    }
    if (!l.empty() && l.size() != d - beta.size()) {
        throw std::invalid_argument("FailureRegion: caps must align with beta complement");
    }
    for (double x : l) {
        if (!(x > 0.0)) {
            throw std::invalid_argument("FailureRegion: caps must be positive");
        }
    }
}

std::vector<std::size_t> FailureRegion::complement(std::size_t d) const {
    std::vector<bool> in_beta(d, false);
    for (std::size_t i : beta) {
        in_beta[i] = true;
    }
    std::vector<std::size_t> out;
    out.reserve(d - beta.size());
    for (std::size_t i = 0; i < d; ++i) {
        if (!in_beta[i]) {
            out.push_back(i);
        }
    }
    return out;
}

double AngularMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& atom : atoms) {
        s += atom.weight;
    }
    return s;
}

std::vector<double> max_linear_transform(const MaxLinearModel& model,
                                         std::span<const double> z) {
    if (z.size() != model.n_cols()) {
        throw std::invalid_argument("max_linear_transform: innovations length mismatch");
    }
    std::vector<double> x(model.dim(), 0.0);
    for (std::size_t i = 0; i < model.dim(); ++i) {
        double m = 0.0;
        const auto row = model.A.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            m = std::max(m, row[j] * z[j]);
        }
        x[i] = m;
    }
    return x;
}

Matrix sample_max_linear(const MaxLinearModel& model, std::size_t n,
                         std::uint64_t seed) {
    model.validate();
    if (n < 1) {
        throw std::invalid_argument("sample_max_linear: n must be >= 1");
    }
    Rng rng(seed);
    const std::size_t d = model.dim();
    const std::size_t q = model.n_cols();
    const double inv_alpha = 1.0 / model.alpha;
    Matrix out(n, d);
    std::vector<double> z(q);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < q; ++j) {
            z[j] = std::pow(-std::log(rng.uniform()), -inv_alpha);
        }
        for (std::size_t i = 0; i < d; ++i) {
            double m = 0.0;
            const auto row = model.A.row(i);
            for (std::size_t j = 0; j < q; ++j) {
                m = std::max(m, row[j] * z[j]);
            }
            out(t, i) = m;
        }
    }
    return out;
}

AngularMeasure angular_measure_of(const MaxLinearModel& model) {
    model.validate();
    const std::size_t d = model.dim();
    AngularMeasure measure;
    measure.atoms.reserve(model.n_cols());
    for (std::size_t j = 0; j < model.n_cols(); ++j) {
        const auto col = model.A.col(j);
        const double norm = norm_alpha(col, model.alpha);
        AngularAtom atom;
        atom.weight = std::pow(norm, model.alpha);
        atom.angle.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            atom.angle[i] = col[i] / norm;
        }
        measure.atoms.push_back(std::move(atom));
    }
    return measure;
}

TailProb failure_prob_approx(const MaxLinearModel& model, const FailureRegion& region,
                             double zero_tol) {
    model.validate();
    region.validate(model.dim());
    if (!(zero_tol >= 0.0)) {
        throw std::invalid_argument("failure_prob_approx: zero_tol must be >= 0");
    }
    const auto comp = region.complement(model.dim());
    double total = 0.0;
    std::vector<double> col(model.dim());
    for (std::size_t j = 0; j < model.n_cols(); ++j) {
        for (std::size_t i = 0; i < model.dim(); ++i) {
            col[i] = model.A(i, j);
        }
        const double norm = norm_alpha(col, model.alpha);
        bool in_subspace = true;
        for (std::size_t i : region.beta) {
            if (!(col[i] / norm > zero_tol)) {
                in_subspace = false;
                break;
            }
        }
        if (in_subspace) {
            for (std::size_t i : comp) {
                if (col[i] / norm > zero_tol) {
                    in_subspace = false;
                    break;
                }
            }
        }
        if (!in_subspace) {
            continue;
        }
        double min_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < region.beta.size(); ++b) {
            min_ratio = std::min(min_ratio, col[region.beta[b]] / region.u[b]);
        }
        total += std::pow(min_ratio, model.alpha);
    }
    TailProb out;
    out.raw = total;
    out.clamped = total > 1.0;
    out.value = std::clamp(total, 0.0, 1.0);
    return out;
}

double failure_prob_upper_bound(const MaxLinearModel& model, const FailureRegion& region,
                                double zero_tol) {
    model.validate();
    region.validate(model.dim());
    if (model.alpha != 1.0) {
        throw std::invalid_argument("failure_prob_upper_bound: requires alpha = 1");
    }
    const double u = region.u.front();
    for (double ui : region.u) {
        if (ui != u) {
            throw std::invalid_argument("failure_prob_upper_bound: requires a scalar threshold");
        }
    }
    const auto comp = region.complement(model.dim());
    const auto measure = angular_measure_of(model);
    double mass = 0.0;
    for (const auto& atom : measure.atoms) {
        bool in_subspace = true;
        for (std::size_t i : region.beta) {
            if (!(atom.angle[i] > zero_tol)) {
                in_subspace = false;
                break;
            }
        }
        if (in_subspace) {
            for (std::size_t i : comp) {
                if (atom.angle[i] > zero_tol) {
                    in_subspace = false;
                    break;
                }
            }
        }
        if (in_subspace) {
            mass += atom.weight;
        }
    }
    return mass / (static_cast<double>(region.beta.size()) * u);
}

TailProb product_rule_prob(std::span<const MaxLinearModel> models,
                           std::span<const FailureRegion> regions,
                           double zero_tol) {
    if (models.empty() || models.size() != regions.size()) {
        throw std::invalid_argument("product_rule_prob: need equally many models and regions");
    }
    TailProb out;
    out.value = 1.0;
    out.raw = 1.0;
    for (std::size_t l = 0; l < models.size(); ++l) {
        TailProb p;
        try {
            p = failure_prob_approx(models[l], regions[l], zero_tol);
        } catch (const std::exception& e) {
            throw std::invalid_argument("product_rule_prob: cluster " + std::to_string(l + 1) +
                                        ": " + e.what());
        }
        out.value *= p.value;
        out.raw *= p.raw;
        out.clamped = out.clamped || p.clamped;
    }
    return out;
}

double cap_factor_independent(const FailureRegion& region, std::size_t d, double alpha) {
    region.validate(d);
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("cap_factor_independent: alpha must be positive");
    }
    if (region.l.empty()) {
        return 1.0;
    }
    double factor = 1.0;
    for (double cap : region.l) {
        if (std::isfinite(cap)) {
            factor *= std::exp(-std::pow(cap, -alpha));
        }
    }
    return factor;
}

} // namespace evt
