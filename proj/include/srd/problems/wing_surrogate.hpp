#pragma once

// Synthetic wing-like surrogate with 9 design variables, 6 uncertain
// parameters and 2 requirements. It is built from smooth analytic functions
// and does not model any aeroelastic physics.
//
// theta = [s1..s4 shape offsets, t1..t5 panel thicknesses]
// delta = [M1, M2, c_m, c_k, nu, CL]
//
// r1 = 1 - q_f / 2        flutter-margin analogue (stiffness against dynamic load)
// r2 = KS(stress) / sy - 1  aggregated stress analogue
// h  = mass + drag        response; J(theta) = h at the center of Delta

#include "srd/problem.hpp"
#include "srd/random.hpp"

#include <array>
#include <cmath>
#include <memory>

namespace srd {

namespace detail {

struct WingCoefficients {
    std::array<double, 5> stiffness{1.0, 0.8, 0.6, 0.4, 0.2};
    std::array<double, 5> span_weight{1.0, 0.85, 0.7, 0.55, 0.4};
    std::array<double, 5> moment_arm{1.0, 0.8, 0.6, 0.45, 0.3};
    std::array<double, 4> twist{0.6, -0.4, 0.5, -0.3};
    std::array<double, 4> shape_opt{1.0, -0.5, 0.8, -1.2};
    double yield = 1.5;
    double ks_rho = 20.0;
    double drag_scale = 0.3;

    void jitter(SeededSampler& rng) {
        auto scale = [&](double& v) { v *= 1.0 + 0.05 * rng.uniform(-1.0, 1.0); };
        for (auto& v : stiffness) scale(v);
        for (auto& v : span_weight) scale(v);
        for (auto& v : moment_arm) scale(v);
        for (auto& v : twist) scale(v);
        for (auto& v : shape_opt) v += 0.2 * rng.uniform(-1.0, 1.0);
    }
};

// delta mapped to [0, 1]^6 using the nominal box
inline std::array<double, 6> wing_unit(const Vector& d) {
    return {(d[0] - 0.4) / 0.5, (d[1] - 0.4) / 0.5, d[2] / 25.0, d[3] / 1e-3, (d[4] - 0.8e-5) / 0.4e-5,
            (d[5] - 0.4) / 0.2};
}

inline double wing_mass(const WingCoefficients& c, const Vector& th) {
    double m = 0.0;
    for (int j = 0; j < 5; ++j) m += c.span_weight[j] * th[4 + j];
    for (int i = 0; i < 4; ++i) m += 0.01 * th[i] * th[i];
    return m;
}

inline double wing_drag(const WingCoefficients& c, const Vector& th, const Vector& d) {
    const auto u = wing_unit(d);
    double shape = 0.0;
    for (int i = 0; i < 4; ++i) shape += (th[i] - c.shape_opt[i]) * (th[i] - c.shape_opt[i]);
    const double thick = (th.tail(5).array() - 1.0).square().sum();
    return c.drag_scale * (1.0 + d[0] * d[0]) * (1.0 + 0.02 * shape + 0.05 * thick) * (1.0 + 0.05 * u[4]) *
           (1.0 + 0.5 * (d[5] - 0.5));
}

inline void wing_requirements(const WingCoefficients& c, const Vector& th, const Vector& d, std::span<double> out) {
    const auto u = wing_unit(d);
    double k = 0.0;
    for (int j = 0; j < 5; ++j) k += c.stiffness[j] * th[4 + j] * th[4 + j];
    double coupling = 0.0;
    for (int i = 0; i < 4; ++i) coupling += c.twist[i] * std::sin(0.3 * th[i] + 2.0 * u[i % 2 == 0 ? 0 : 1]);
    const double load = (0.5 + d[0] * d[0] + 0.5 * d[1] * d[1]) * (1.0 + 0.3 * u[2] + 0.2 * u[3]);
    const double q_f = k * (1.0 + 0.1 * coupling) / (0.8 * load);
    out[0] = 1.0 - q_f / 2.0;

    const double lift = (d[5] / 0.5) * (1.0 + 0.3 * u[0]) * (1.0 + 0.02 * u[4]);
    double peak = 0.0;
    std::array<double, 5> stress{};
    for (int j = 0; j < 5; ++j) {
        const double shape = j < 4 ? 1.0 + 0.1 * std::sin(0.4 * th[j]) : 1.0;
        stress[j] = lift * c.moment_arm[j] * shape / (th[4 + j] * th[4 + j]);
        peak = std::max(peak, stress[j]);
    }
    double s = 0.0;
    for (double v : stress) s += std::exp(c.ks_rho * (v - peak));
    const double ks = peak + std::log(s) / c.ks_rho;
    out[1] = ks / c.yield - 1.0;
}

}  // namespace detail

struct WingSurrogate {
    DesignProblem problem;
    bool probe_feasible = false;  // some sampled (theta, delta) pair met both requirements
    Vector probe_theta;
    Vector probe_delta;
};

/// Builds the surrogate. `seed` jitters the coefficients by a few percent and
/// drives the feasibility probe, so the result is a deterministic function of it.
inline WingSurrogate wing_surrogate_problem(std::uint64_t seed = 1, int probes = 512) {
    auto coeffs = std::make_shared<detail::WingCoefficients>();
    SeededSampler rng(seed, 0x3149);
    coeffs->jitter(rng);

    WingSurrogate w;
    DesignProblem& p = w.problem;
    p.name = "wing_surrogate";
    p.synthetic = true;
    p.n_theta = 9;
    p.n_delta = 6;
    p.n_r = 2;
    p.theta_lower.resize(9);
    p.theta_upper.resize(9);
    p.theta_lower << -5, -5, -5, -5, 0.25, 0.25, 0.25, 0.25, 0.25;
    p.theta_upper << 5, 5, 5, 5, 1.75, 1.75, 1.75, 1.75, 1.75;
    p.delta_lower.resize(6);
    p.delta_upper.resize(6);
    p.delta_lower << 0.4, 0.4, 0.0, 0.0, 0.8e-5, 0.4;
    p.delta_upper << 0.9, 0.9, 25.0, 1e-3, 1.2e-5, 0.6;

    std::shared_ptr<const detail::WingCoefficients> c = coeffs;
    const Vector center = 0.5 * (p.delta_lower + p.delta_upper);
    p.response = [c](const Vector& th, const Vector& d) {
        return detail::wing_mass(*c, th) + detail::wing_drag(*c, th, d);
    };
    p.objective = [c, center](const Vector& th) {
        return detail::wing_mass(*c, th) + detail::wing_drag(*c, th, center);
    };
    p.requirements_fn = [c](const Vector& th, const Vector& d, std::span<double> out) {
        detail::wing_requirements(*c, th, d, out);
    };
    p.initial_guess = Vector::Constant(9, 1.5);
    p.initial_guess.head(4) = Vector::Zero(4);

    for (int k = 0; k < probes && !w.probe_feasible; ++k) {
        Vector th = rng.uniform_in_box(p.theta_lower, p.theta_upper);
        Vector d = rng.uniform_in_box(p.delta_lower, p.delta_upper);
        if (p.succeeds(th, d)) {
            w.probe_feasible = true;
            w.probe_theta = std::move(th);
            w.probe_delta = std::move(d);
        }
    }
    return w;
}

}  // namespace srd
