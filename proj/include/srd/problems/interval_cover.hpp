#pragma once

// One-dimensional interval cover: choose the smallest threshold theta that
// covers the scenarios, J(theta) = theta and r(theta, delta) = delta - theta.
// Every formulation has a closed-form optimum on it, which makes it the
// workhorse of the oracle tests.

#include "srd/problem.hpp"

namespace srd {

inline DesignProblem interval_cover_problem(double theta_lo = 0.0, double theta_hi = 10.0, double delta_lo = 0.0,
                                            double delta_hi = 4.0) {
    if (!(theta_lo < theta_hi) || !(delta_lo < delta_hi)) throw ConfigError("interval_cover: empty box");
    DesignProblem p;
    p.name = "interval_cover";
    p.n_theta = 1;
    p.n_delta = 1;
    p.n_r = 1;
    p.theta_lower = Vector::Constant(1, theta_lo);
    p.theta_upper = Vector::Constant(1, theta_hi);
    p.delta_lower = Vector::Constant(1, delta_lo);
    p.delta_upper = Vector::Constant(1, delta_hi);
    p.objective = [](const Vector& theta) { return theta[0]; };
    p.requirements_fn = [](const Vector& theta, const Vector& delta, std::span<double> out) {
        out[0] = delta[0] - theta[0];
    };
    // response used by the moment programs: the scenario value itself
    p.response = [](const Vector&, const Vector& delta) { return delta[0]; };
    return p;
}

}  // namespace srd
