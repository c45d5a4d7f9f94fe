#pragma once

#include "srd/common.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <span>
#include <string>

namespace srd {

/// A design problem: minimize J(theta) over the box Theta subject to the
/// requirements r_k(theta, delta) <= 0 for the scenarios of interest.
///
/// Requirement callables write all n_r values at once into `out`, which lets
/// problems share intermediate quantities between requirements. All callables
/// must be pure so that they can be evaluated concurrently.
struct DesignProblem {
    using Objective = std::function<double(const Vector& theta)>;
    using Requirements =
        std::function<void(const Vector& theta, const Vector& delta, std::span<double> out)>;
    using Response = std::function<double(const Vector& theta, const Vector& delta)>;
    using DesignConstraints = std::function<void(const Vector& theta, std::span<double> out)>;

    std::string name;
    Eigen::Index n_theta = 0;
    Eigen::Index n_delta = 0;
    Eigen::Index n_r = 0;

    Vector theta_lower;
    Vector theta_upper;
    // parameter box used to generate training/testing data
    Vector delta_lower;
    Vector delta_upper;

    Objective objective;
    Requirements requirements_fn;
    Response response;  // optional

    // g(theta) <= 0 conditions on the design itself, never relaxed
    Eigen::Index n_design_constraints = 0;
    DesignConstraints design_constraints;

    Vector initial_guess;  // optional; empty means the box center
    bool synthetic = false;

    bool has_response() const { return static_cast<bool>(response); }

    Vector requirements(const Vector& theta, const Vector& delta) const {
        Vector r(n_r);
        requirements_fn(theta, delta, std::span<double>(r.data(), static_cast<std::size_t>(n_r)));
        return r;
    }

    double max_requirement(const Vector& theta, const Vector& delta) const {
        if (n_r == 0) return -std::numeric_limits<double>::infinity();
        return requirements(theta, delta).maxCoeff();
    }

    /// True iff delta lies in the success domain S(theta).
    bool succeeds(const Vector& theta, const Vector& delta) const {
        return max_requirement(theta, delta) <= 0.0;
    }

    Vector box_center() const { return 0.5 * (theta_lower + theta_upper); }

    Vector start() const { return initial_guess.size() == n_theta ? initial_guess : box_center(); }

    double delta_box_volume() const { return (delta_upper - delta_lower).prod(); }

    void check_theta(const Vector& theta) const {
        if (theta.size() != n_theta)
            throw InvalidInput("design has dimension " + std::to_string(theta.size()) +
                               " but problem '" + name + "' expects " + std::to_string(n_theta));
    }
};

/// Copy of `problem` with its objective replaced by J = 0.
inline DesignProblem with_zero_objective(DesignProblem problem) {
    problem.objective = [](const Vector&) { return 0.0; };
    return problem;
}

}  // namespace srd
