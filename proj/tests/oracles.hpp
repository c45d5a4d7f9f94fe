#pragma once

// Test-only reference computations. Nothing here calls into the library's
// implementation paths; each function evaluates its formula directly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Piecewise-linear CDF by a plain scan over the knots (1-based formula).
inline double ecdf(const std::vector<double>& z, double x) {
    const std::size_t n = z.size();
    if (x <= z[0]) return 0.0;
    for (std::size_t i = 1; i < n; ++i) {  // i is 1-based index of z_i
        const double zi = z[i - 1], zi1 = z[i];
        if (zi < x && x <= zi1) return (static_cast<double>(i) - 1.0 + (x - zi) / (zi1 - zi)) / static_cast<double>(n - 1);
    }
    return 1.0;
}

/// Inverse CDF with the literal argmin index rule.
inline double ecdf_inverse(const std::vector<double>& z, double alpha) {
    const std::size_t n = z.size();
    if (n == 1) return z[0];
    if (alpha == 0.0) return z[0];
    if (alpha >= 1.0) return z[n - 1];
    const double t = static_cast<double>(n - 1) * alpha;
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= n; ++j) {
        if (static_cast<double>(j) - 1.0 <= t) {
            const double val = t - static_cast<double>(j) + 1.0;
            if (val < best_val) {
                best_val = val;
                best = j;
            }
        }
    }
    if (best >= n) return z[n - 1];
    const double zi = z[best - 1], zi1 = z[best];
    return zi + (zi1 - zi) * (t - static_cast<double>(best) + 1.0);
}

/// Quantile of an unsorted sample via the literal formula (sorted copy, no tie handling).
inline double quantile(std::vector<double> v, double alpha) {
    std::sort(v.begin(), v.end());
    return ecdf_inverse(v, alpha);
}

/// P[X <= k] for X ~ Binomial(n, p) by direct summation in log space.
inline double binomial_cdf(int k, int n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    double sum = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double logc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
        sum += std::exp(logc + i * std::log(p) + (n - i) * std::log1p(-p));
    }
    return std::min(1.0, sum);
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(lo) < 0) == (f(mid) < 0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Exact two-sided interval by inverting the binomial tails numerically.
inline std::pair<double, double> clopper_pearson(int x, int n, double level) {
    const double a = 0.5 * (1.0 - level);
    double lo = 0.0, hi = 1.0;
    // lower: P[X >= x | p] = a
    if (x > 0) lo = bisect([&](double p) { return (1.0 - binomial_cdf(x - 1, n, p)) - a; }, 0.0, 1.0);
    // upper: P[X <= x | p] = a
    if (x < n) hi = bisect([&](double p) { return binomial_cdf(x, n, p) - a; }, 0.0, 1.0);
    return {lo, hi};
}

}  // namespace oracle

namespace oracle {

/// Interval cover: the smallest theta whose interpolated (1 - sigma/n)
/// quantile constraint excludes exactly the subset `out` of scenarios.
/// Covering the inliers costs max(inliers); the linear interpolation toward
/// the nearest excluded scenario adds sigma/n of the gap above them.
inline double cover_excluding(const std::vector<double>& d, const std::vector<bool>& out) {
    double top_in = -std::numeric_limits<double>::infinity();
    double low_out = std::numeric_limits<double>::infinity();
    std::size_t sigma = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (out[i]) {
            low_out = std::min(low_out, d[i]);
            ++sigma;
        } else {
            top_in = std::max(top_in, d[i]);
        }
    }
    if (sigma == 0) return top_in;
    const double w = static_cast<double>(sigma) / static_cast<double>(d.size());
    return top_in + w * std::max(0.0, low_out - top_in);
}

/// Best cover over every subset of exactly `sigma` excluded scenarios.
inline double best_cover_over_subsets(const std::vector<double>& d, std::size_t sigma) {
    const std::size_t n = d.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != sigma) continue;
        std::vector<bool> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = (mask >> i) & 1u;
        best = std::min(best, cover_excluding(d, out));
    }
    return best;
}

/// Area of the part of the box [-w, w]^2 inside the circle of radius `outer`
/// and outside the concentric circle of radius `inner`, by a fine midpoint grid.
inline double annulus_area_in_box(double inner, double outer, double w, int grid = 2000) {
    const double h = 2.0 * w / grid;
    long long count = 0;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            const double x = -w + (a + 0.5) * h, y = -w + (b + 0.5) * h;
            const double r = std::sqrt(x * x + y * y);
            if (r <= outer && r >= inner) ++count;
        }
    return static_cast<double>(count) * h * h;
}

}  // namespace oracle
