#pragma once

// Piecewise-linear empirical CDF of a finite sample and its exact inverse.
//
// For a strictly increasing sample z_1 < ... < z_n the CDF is 0 at and below
// z_1, 1 above z_n, and interpolates linearly between the knots
// (z_i, (i-1)/(n-1)). Every chance constraint in the formulations is written
// as an inverse-CDF value of such a sample, so these functions sit on the hot
// path of every objective/constraint evaluation.

#include "srd/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace srd {

inline constexpr double kDefaultTieEpsilon = 1e-9;

/// Strictly increasing, finite, non-empty sequence of reals.
class SortedSample {
public:
    /// Validates that `values` is finite and strictly increasing.
    static SortedSample from_strict(std::vector<double> values) {
        if (values.empty()) throw InvalidInput("empty sample");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) throw InvalidInput("non-finite sample value");
            if (i > 0 && !(values[i - 1] < values[i]))
                throw InvalidInput("sample is not strictly increasing");
        }
        return SortedSample(std::move(values));
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }
    std::span<const double> values() const noexcept { return values_; }

private:
    friend SortedSample break_ties(std::span<const double>, double);
    friend SortedSample break_ties_scaled(std::span<const double>);
    explicit SortedSample(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

namespace detail {

// Sorts in place (stable) and pushes every value that does not exceed its
// predecessor to predecessor + epsilon.
inline void sort_and_separate(std::vector<double>& v, double epsilon) {
    std::stable_sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) v[i] = v[i - 1] + epsilon;
}

inline double tie_epsilon(std::span<const double> v) {
    if (v.empty()) return kDefaultTieEpsilon;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double range = *hi - *lo;
    if (range > 0.0) return kDefaultTieEpsilon * range;
    return kDefaultTieEpsilon * std::max(1.0, std::abs(*lo));
}

// (n-1)*alpha, snapped onto the nearest integer when it is within rounding
// noise so that knot levels hit order statistics exactly.
inline double knot_position(std::size_t n, double alpha) {
    double t = static_cast<double>(n - 1) * alpha;
    double r = std::round(t);
    if (std::abs(t - r) <= 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n))
        t = r;
    return t;
}

inline double inverse_sorted(std::span<const double> z, double alpha) {
    const std::size_t n = z.size();
    if (n == 1 || alpha <= 0.0) return z.front();
    if (alpha >= 1.0) return z.back();
    const double t = knot_position(n, alpha);
    auto i = static_cast<std::size_t>(std::floor(t));
    if (i >= n - 1) return z.back();
    return z[i] + (z[i + 1] - z[i]) * (t - static_cast<double>(i));
}

inline double eval_sorted(std::span<const double> z, double x) {
    const std::size_t n = z.size();
    if (n == 1) return x >= z.front() ? 1.0 : 0.0;
    if (x <= z.front()) return 0.0;
    if (x > z.back()) return 1.0;
    // first knot >= x; then z[p-1] < x <= z[p]
    auto p = static_cast<std::size_t>(std::lower_bound(z.begin(), z.end(), x) - z.begin());
    const double lo = z[p - 1];
    const double hi = z[p];
    return (static_cast<double>(p - 1) + (x - lo) / (hi - lo)) / static_cast<double>(n - 1);
}

}  // namespace detail

/// Sorts `values` stably and breaks ties by adding multiples of `epsilon`.
inline SortedSample break_ties(std::span<const double> values, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInput("tie-breaking epsilon must be positive");
    std::vector<double> v(values.begin(), values.end());
    detail::sort_and_separate(v, epsilon);
    return SortedSample(std::move(v));
}

/// break_ties with the default epsilon, 1e-9 times the sample range.
inline SortedSample break_ties_scaled(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    detail::sort_and_separate(v, detail::tie_epsilon(values));
    return SortedSample(std::move(v));
}

/// Empirical CDF at `z`. A singleton sample is a unit step at its value.
inline double ecdf_eval(const SortedSample& sample, double z) {
    return detail::eval_sorted(sample.values(), z);
}

/// Inverse empirical CDF at probability level `alpha` in [0, 1].
inline double ecdf_inverse(const SortedSample& sample, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
    return detail::inverse_sorted(sample.values(), alpha);
}

/// Inverse empirical CDF of an unsorted multiset, with automatic tie breaking.
/// `scratch` is reused between calls to avoid reallocations.
inline double quantile(std::span<const double> values, double alpha, std::vector<double>& scratch) {
    if (values.empty()) throw InvalidInput("empty sample");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
    if (values.size() == 1) return values.front();
    scratch.assign(values.begin(), values.end());
    detail::sort_and_separate(scratch, detail::tie_epsilon(values));
    return detail::inverse_sorted(scratch, alpha);
}

inline double quantile(std::span<const double> values, double alpha) {
    std::vector<double> scratch;
    return quantile(values, alpha, scratch);
}

/// Empirical CDF of an unsorted sample whose values are pairwise distinct, in
/// one pass without sorting. Agrees with ecdf_eval on the sorted sample.
inline double cdf_distinct(std::span<const double> values, double z) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidInput("empty sample");
    if (n == 1) return z >= values.front() ? 1.0 : 0.0;
    std::size_t below = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (v < z) {
            ++below;
            lo = std::max(lo, v);
        } else {
            hi = std::min(hi, v);
        }
    }
    if (below == 0) return 0.0;
    if (below == n) return 1.0;
    return (static_cast<double>(below - 1) + (z - lo) / (hi - lo)) / static_cast<double>(n - 1);
}

/// Empirical CDF of an unsorted multiset at `z`, with automatic tie breaking.
inline double cdf(std::span<const double> values, double z) {
    if (values.empty()) throw InvalidInput("empty sample");
    return ecdf_eval(break_ties_scaled(values), z);
}

}  // namespace srd
