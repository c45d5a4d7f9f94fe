#pragma once

// Data enclosure: find the annulus-like set of minimal area that contains
// (most of) a 2-D dataset. The success domain is the inside of circle C1
// (center c1, radius u1) minus the inside of circle C2 (center c2, radius u2):
//
//   r1 = ||delta - c1|| - u1 <= 0,    r2 = u2 - ||delta - c2|| <= 0.
//
// The area is estimated from a fixed cloud of uniform points in the box Delta
// through the empirical CDF of max(r1, r2) at zero.

#include "srd/ecdf.hpp"
#include "srd/problem.hpp"
#include "srd/random.hpp"
#include "srd/scenario.hpp"

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

namespace srd {

/// theta = [c1x, c1y, u1, c2x, c2y, u2]
struct EnclosureDesign {
    Eigen::Vector2d c1 = Eigen::Vector2d::Zero();
    double u1 = 1.0;
    Eigen::Vector2d c2 = Eigen::Vector2d::Zero();
    double u2 = 0.5;

    static EnclosureDesign unpack(const Vector& theta) {
        if (theta.size() != 6) throw InvalidInput("enclosure design needs 6 components");
        EnclosureDesign d;
        d.c1 = {theta[0], theta[1]};
        d.u1 = theta[2];
        d.c2 = {theta[3], theta[4]};
        d.u2 = theta[5];
        return d;
    }

    Vector pack() const {
        Vector t(6);
        t << c1.x(), c1.y(), u1, c2.x(), c2.y(), u2;
        return t;
    }

    bool valid() const { return u1 > 0.0 && u2 > 0.0 && (c2 - c1).norm() <= u1; }
};

inline std::pair<double, double> enclosure_requirements(const EnclosureDesign& d, const Vector& delta) {
    const Eigen::Vector2d p(delta[0], delta[1]);
    return {(p - d.c1).norm() - d.u1, d.u2 - (p - d.c2).norm()};
}

namespace detail {

struct PointCloud2 {
    std::vector<double> x, y;
};

inline PointCloud2 uniform_cloud(const Vector& lo, const Vector& hi, std::size_t n, SeededSampler& rng) {
    PointCloud2 c;
    c.x.resize(n);
    c.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.x[i] = rng.uniform(lo[0], hi[0]);
        c.y[i] = rng.uniform(lo[1], hi[1]);
    }
    return c;
}

inline double cloud_volume(const Vector& theta, const PointCloud2& cloud, double box_volume) {
    const EnclosureDesign d = EnclosureDesign::unpack(theta);
    std::vector<double> z(cloud.x.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double dx1 = cloud.x[i] - d.c1.x(), dy1 = cloud.y[i] - d.c1.y();
        const double dx2 = cloud.x[i] - d.c2.x(), dy2 = cloud.y[i] - d.c2.y();
        const double r1 = std::sqrt(dx1 * dx1 + dy1 * dy1) - d.u1;
        const double r2 = d.u2 - std::sqrt(dx2 * dx2 + dy2 * dy2);
        z[i] = std::max(r1, r2);
    }
    return box_volume * cdf_distinct(z, 0.0);  // uniform draws: ties have probability zero
}

}  // namespace detail

/// Vol(Delta) * F_Z(0) with Z = max_k r_k(theta, u) over `mc_points` uniform draws u in Delta.
inline double enclosure_volume(const Vector& theta, const Vector& delta_lower, const Vector& delta_upper,
                               std::size_t mc_points, SeededSampler& sampler) {
    if (mc_points < 1) throw InvalidInput("mc_points must be at least 1");
    auto cloud = detail::uniform_cloud(delta_lower, delta_upper, mc_points, sampler);
    return detail::cloud_volume(theta, cloud, (delta_upper - delta_lower).prod());
}

struct EnclosureOptions {
    double half_width = 8.0;  // Delta = [-w, w]^2
    std::size_t mc_points = 20000;
    std::uint64_t seed = 7;
    double min_radius = 1e-3;
};

/// The enclosure problem. The area objective uses one fixed point cloud drawn
/// from `options.seed`, so J is a deterministic function of theta.
inline DesignProblem enclosure_problem(const EnclosureOptions& options = {}) {
    const double w = options.half_width;
    DesignProblem p;
    p.name = "enclosure";
    p.n_theta = 6;
    p.n_delta = 2;
    p.n_r = 2;
    p.delta_lower = Vector::Constant(2, -w);
    p.delta_upper = Vector::Constant(2, w);
    p.theta_lower.resize(6);
    p.theta_upper.resize(6);
    const double rmax = std::sqrt(2.0) * w;
    p.theta_lower << -w, -w, options.min_radius, -w, -w, options.min_radius;
    p.theta_upper << w, w, rmax, w, w, rmax;

    SeededSampler rng(options.seed, 0xa7ea);
    auto cloud = std::make_shared<const detail::PointCloud2>(
        detail::uniform_cloud(p.delta_lower, p.delta_upper, options.mc_points, rng));
    const double box_volume = p.delta_box_volume();
    p.objective = [cloud, box_volume](const Vector& theta) { return detail::cloud_volume(theta, *cloud, box_volume); };
    p.requirements_fn = [](const Vector& theta, const Vector& delta, std::span<double> out) {
        auto [r1, r2] = enclosure_requirements(EnclosureDesign::unpack(theta), delta);
        out[0] = r1;
        out[1] = r2;
    };
    p.n_design_constraints = 1;
    p.design_constraints = [](const Vector& theta, std::span<double> out) {
        const EnclosureDesign d = EnclosureDesign::unpack(theta);
        out[0] = (d.c2 - d.c1).norm() - d.u1;
    };
    return p;
}

/// A start that encloses every scenario: C1 around the centroid, a small C2
/// at the same center.
inline Vector enclosure_initial_guess(const std::vector<Scenario>& data) {
    EnclosureDesign d;
    if (data.empty()) return d.pack();
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& s : data) c += Eigen::Vector2d(s[0], s[1]);
    c /= static_cast<double>(data.size());
    double far = 0.0, near = std::numeric_limits<double>::infinity();
    for (const auto& s : data) {
        const double r = (Eigen::Vector2d(s[0], s[1]) - c).norm();
        far = std::max(far, r);
        near = std::min(near, r);
    }
    d.c1 = c;
    d.c2 = c;
    d.u1 = 1.05 * far + 1e-3;
    d.u2 = std::max(1e-3, 0.5 * near);
    return d.pack();
}

/// Ring-shaped data mechanism: uniform angle, radius R0 + s * T with T a
/// Student-t variate (4 degrees of freedom), restricted to the box.
struct RingMechanism {
    double base_radius = 2.5;
    double spread = 0.35;
    double half_width = 8.0;

    Scenario draw(SeededSampler& rng) const {
        for (;;) {
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            double chi2 = 0.0;
            for (int k = 0; k < 4; ++k) {
                const double z = rng.normal();
                chi2 += z * z;
            }
            const double t = rng.normal() / std::sqrt(chi2 / 4.0);
            const double r = base_radius + spread * t;
            if (r < 0.3) continue;
            Scenario s(2);
            s << r * std::cos(angle), r * std::sin(angle);
            if (std::abs(s[0]) < half_width && std::abs(s[1]) < half_width) return s;
        }
    }

    std::vector<Scenario> sample(std::size_t n, SeededSampler& rng) const {
        std::vector<Scenario> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng));
        return out;
    }
};

}  // namespace srd
