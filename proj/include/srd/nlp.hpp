#pragma once

// Box-bounded nonlinear programming with inequality constraints g(x) <= 0.
//
// The solver is an augmented-Lagrangian (Powell-Hestenes-Rockafellar) outer
// loop around a projected quasi-Newton (BFGS) inner minimizer. All
// derivatives are central finite differences, so the only requirement on a
// program is that its callables be finite on the bound box. ECDF kinks and
// max-compositions make many programs nonsmooth; the merit function stays
// continuous, and the line search simply terminates at kinks it cannot
// resolve.

#include "srd/common.hpp"
#include "srd/parallel.hpp"
#include "srd/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace srd {

/// Where each block of decision variables lives inside x.
struct VariableLayout {
    Eigen::Index theta_offset = 0, n_theta = 0;
    Eigen::Index xi_offset = -1, n_xi = 0;      // per-scenario slack
    Eigen::Index zeta_offset = -1, n_zeta = 0;  // per-requirement slack
    Eigen::Index lambda_offset = -1;            // moment bound

    Vector theta(const Vector& x) const { return x.segment(theta_offset, n_theta); }
    Vector xi(const Vector& x) const { return n_xi ? Vector(x.segment(xi_offset, n_xi)) : Vector(); }
    Vector zeta(const Vector& x) const { return n_zeta ? Vector(x.segment(zeta_offset, n_zeta)) : Vector(); }
    double lambda(const Vector& x) const {
        return lambda_offset >= 0 ? x[lambda_offset] : std::numeric_limits<double>::quiet_NaN();
    }
};

/// min f(x) s.t. g_j(x) <= 0, lower <= x <= upper.
struct NlpProgram {
    using Objective = std::function<double(const Vector&)>;
    using Constraints = std::function<void(const Vector&, std::span<double>)>;

    std::string description;
    Eigen::Index n_vars = 0;
    Vector lower;
    Vector upper;
    Objective objective;
    Eigen::Index n_constraints = 0;
    Constraints constraints_fn;
    // Optional: overwrite auxiliary variables of a start point given its theta block.
    std::function<void(Vector&)> complete_start;
    VariableLayout layout;
    Vector x0;  // suggested start (may be empty)

    Vector constraints(const Vector& x) const {
        Vector g(n_constraints);
        if (n_constraints)
            constraints_fn(x, std::span<double>(g.data(), static_cast<std::size_t>(n_constraints)));
        return g;
    }

    double max_violation(const Vector& x) const {
        if (!n_constraints) return 0.0;
        return std::max(0.0, constraints(x).maxCoeff());
    }

    Vector project(Vector x) const {
        for (Eigen::Index i = 0; i < n_vars; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
        return x;
    }
};

struct SolverOptions {
    int max_outer = 50;
    int max_inner = 400;
    double constraint_tol = 1e-6;
    double objective_tol = 1e-8;
    double fd_step = 1e-6;  // relative: h_j = fd_step * max(1, |x_j|)
    double penalty_growth = 10.0;
    double initial_penalty = 10.0;
    double max_penalty = 1e12;
    int multistart = 1;
    std::uint64_t seed = 0;
    std::ostream* trace = nullptr;  // "iteration,J,max_violation" per outer iteration
};

enum class SolveStatus { Converged, MaxIter, InfeasiblePoint };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIter: return "max-iter";
        case SolveStatus::InfeasiblePoint: return "infeasible-point";
    }
    return "unknown";
}

struct NlpSolution {
    Vector x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double max_violation = std::numeric_limits<double>::infinity();
    SolveStatus status = SolveStatus::InfeasiblePoint;
    int iterations = 0;         // outer iterations
    int inner_iterations = 0;
    long long evaluations = 0;  // objective+constraint evaluations

    bool feasible() const { return status != SolveStatus::InfeasiblePoint; }
};

/// Central-difference gradient with component-relative steps
/// h_j = step * max(1, |x_j|). Uses exactly 2 * dim evaluations of f.
inline Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double step) {
    const Eigen::Index n = x.size();
    Vector grad(n);
    std::vector<double> plus(static_cast<std::size_t>(n)), minus(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double h = step * std::max(1.0, std::abs(x[jj]));
        Vector xp = x, xm = x;
        xp[jj] += h;
        xm[jj] -= h;
        plus[j] = f(xp);
        minus[j] = f(xm);
    });
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (!std::isfinite(plus[sj]) || !std::isfinite(minus[sj]))
            throw NonFiniteValue("non-finite function value in finite differences", sj);
        const double h = step * std::max(1.0, std::abs(x[j]));
        grad[j] = (plus[sj] - minus[sj]) / (2.0 * h);
    }
    return grad;
}

namespace detail {

struct PointValue {
    double f = 0.0;
    Vector g;
    double violation = 0.0;
};

class AugmentedLagrangian {
public:
    AugmentedLagrangian(const NlpProgram& p, const SolverOptions& o) : prog_(p), opt_(o) {}

    PointValue evaluate(const Vector& x) const {
        PointValue v;
        v.f = prog_.objective(x);
        v.g = prog_.constraints(x);
        v.violation = v.g.size() ? std::max(0.0, v.g.maxCoeff()) : 0.0;
        ++evaluations_;
        return v;
    }

    double merit(const PointValue& v) const {
        double m = v.f;
        for (Eigen::Index j = 0; j < v.g.size(); ++j) {
            const double s = std::max(0.0, multipliers_[j] + penalty_ * v.g[j]);
            m += (s * s - multipliers_[j] * multipliers_[j]) / (2.0 * penalty_);
        }
        return m;
    }

    double merit_at(const Vector& x) const {
        PointValue v = evaluate(x);
        double m = merit(v);
        return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
    }

    // Central differences kept inside the box; at a bound the stencil shifts
    // to one side and reuses the merit at x.
    Vector merit_gradient(const Vector& x, double fx) const {
        const Eigen::Index n = x.size();
        Vector grad(n);
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t sj) {
            const auto j = static_cast<Eigen::Index>(sj);
            const double h = opt_.fd_step * std::max(1.0, std::abs(x[j]));
            const bool up_ok = x[j] + h <= prog_.upper[j];
            const bool down_ok = x[j] - h >= prog_.lower[j];
            Vector xp = x, xm = x;
            if (up_ok && down_ok) {
                xp[j] += h;
                xm[j] -= h;
                grad[j] = (merit_at(xp) - merit_at(xm)) / (2.0 * h);
            } else if (up_ok) {
                xp[j] += h;
                grad[j] = (merit_at(xp) - fx) / h;
            } else if (down_ok) {
                xm[j] -= h;
                grad[j] = (fx - merit_at(xm)) / h;
            } else {
                grad[j] = 0.0;  // box thinner than the stencil
            }
            if (!std::isfinite(grad[j])) grad[j] = 0.0;
        });
        return grad;
    }

    // Projected BFGS on the merit function. Returns the number of iterations.
    int minimize(Vector& x) const {
        const Eigen::Index n = x.size();
        double fx = merit_at(x);
        Vector grad = merit_gradient(x, fx);
        Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
        bool identity = true;
        int stall = 0;
        int it = 0;
        for (; it < opt_.max_inner; ++it) {
            std::vector<bool> fixed(static_cast<std::size_t>(n));
            double pg = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const bool at_lo = x[i] <= prog_.lower[i] && grad[i] > 0.0;
                const bool at_hi = x[i] >= prog_.upper[i] && grad[i] < 0.0;
                fixed[static_cast<std::size_t>(i)] = at_lo || at_hi;
                if (!fixed[static_cast<std::size_t>(i)]) pg = std::max(pg, std::abs(grad[i]));
            }
            if (pg <= 1e-14 * (1.0 + std::abs(fx))) break;

            Vector gf = grad;
            for (Eigen::Index i = 0; i < n; ++i)
                if (fixed[static_cast<std::size_t>(i)]) gf[i] = 0.0;
            Vector d = -(H * gf);
            for (Eigen::Index i = 0; i < n; ++i)
                if (fixed[static_cast<std::size_t>(i)]) d[i] = 0.0;
            if (!(d.dot(gf) < 0.0)) {
                H.setIdentity();
                identity = true;
                d = -gf;
            }
            if (identity) {
                // first step from an unscaled metric: cap its length
                const double dn = d.lpNorm<Eigen::Infinity>();
                const double cap = 0.1 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
                if (dn > cap) d *= cap / dn;
            }

            double t = 1.0;
            Vector xt;
            double ft = fx;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                xt = prog_.project(x + t * d);
                ft = merit_at(xt);
                const double decrease = grad.dot(xt - x);
                if (ft <= fx + 1e-4 * decrease && ft < fx) {
                    accepted = true;
                    break;
                }
                if ((xt - x).lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
                t *= 0.5;
            }
            if (!accepted) {
                if (!identity) {
                    H.setIdentity();
                    identity = true;
                    continue;
                }
                break;
            }

            Vector s = xt - x;
            Vector gnew = merit_gradient(xt, ft);
            Vector y = gnew - grad;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                if (identity) {
                    H *= sy / y.squaredNorm();
                    identity = false;
                }
                const double rho = 1.0 / sy;
                Vector Hy = H * y;
                H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
            }
            const double df = fx - ft;
            x = xt;
            grad = gnew;
            const bool small_f = df <= opt_.objective_tol * (1.0 + std::abs(fx));
            const bool small_x = s.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
            fx = ft;
            stall = (small_f || small_x) ? stall + 1 : 0;
            if (stall >= 3) break;
        }
        return it;
    }

    void reset(Eigen::Index m) {
        multipliers_ = Vector::Zero(m);
        penalty_ = opt_.initial_penalty;
    }

    void update_multipliers(const Vector& g) {
        for (Eigen::Index j = 0; j < g.size(); ++j) multipliers_[j] = std::max(0.0, multipliers_[j] + penalty_ * g[j]);
    }

    void grow_penalty() { penalty_ = std::min(opt_.max_penalty, penalty_ * opt_.penalty_growth); }
    long long evaluations() const { return evaluations_; }

private:
    const NlpProgram& prog_;
    const SolverOptions& opt_;
    Vector multipliers_;
    double penalty_ = 10.0;
    mutable std::atomic<long long> evaluations_{0};
};

}  // namespace detail

/// Solves `program` from `x0` (projected onto the box first). Deterministic.
inline NlpSolution solve(const NlpProgram& program, const Vector& x0, const SolverOptions& options) {
    if (x0.size() != program.n_vars) throw InvalidInput("start point has the wrong dimension");
    detail::AugmentedLagrangian al(program, options);
    al.reset(program.n_constraints);

    Vector x = program.project(x0);
    detail::PointValue v = al.evaluate(x);
    if (!std::isfinite(v.f) || !v.g.allFinite())
        throw InvalidStart("objective or constraints are not finite at the start point");

    NlpSolution best_feasible;
    bool have_feasible = false;
    NlpSolution least_infeasible;
    least_infeasible.x = x;
    least_infeasible.objective = v.f;
    least_infeasible.max_violation = v.violation;

    auto record = [&](const Vector& xk, const detail::PointValue& vk) {
        if (vk.violation <= options.constraint_tol) {
            if (!have_feasible || vk.f < best_feasible.objective) {
                best_feasible.x = xk;
                best_feasible.objective = vk.f;
                best_feasible.max_violation = vk.violation;
                have_feasible = true;
            }
        } else if (vk.violation < least_infeasible.max_violation) {
            least_infeasible.x = xk;
            least_infeasible.objective = vk.f;
            least_infeasible.max_violation = vk.violation;
        }
    };
    record(x, v);

    double prev_violation = v.violation;
    double prev_f = v.f;
    bool converged = false;
    int outer = 0;
    int inner_total = 0;
    for (; outer < options.max_outer && !converged; ++outer) {
        const Vector x_before = x;
        inner_total += al.minimize(x);
        v = al.evaluate(x);
        record(x, v);
        if (options.trace)
            *options.trace << outer + 1 << ',' << v.f << ',' << v.violation << '\n';

        const bool feasible = v.violation <= options.constraint_tol;
        const bool settled_f = std::abs(v.f - prev_f) <= std::max(options.objective_tol, 1e-10) * (1.0 + std::abs(v.f));
        const bool settled_x =
            (x - x_before).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + x.lpNorm<Eigen::Infinity>());
        if (feasible && outer > 0 && (settled_f || settled_x)) converged = true;
        if (program.n_constraints == 0 && outer > 0 && (settled_f || settled_x)) converged = true;

        al.update_multipliers(v.g);
        if (!feasible && v.violation > 0.25 * prev_violation) al.grow_penalty();
        prev_violation = v.violation;
        prev_f = v.f;
    }

    NlpSolution out = have_feasible ? best_feasible : least_infeasible;
    out.iterations = outer;
    out.inner_iterations = inner_total;
    out.evaluations = al.evaluations();
    if (!have_feasible)
        out.status = SolveStatus::InfeasiblePoint;
    else
        out.status = converged ? SolveStatus::Converged : SolveStatus::MaxIter;
    return out;
}

/// True when `a` is preferred over `b`: feasible beats infeasible, then lower
/// objective among feasible, lower violation among infeasible.
inline bool better_solution(const NlpSolution& a, const NlpSolution& b) {
    if (a.feasible() != b.feasible()) return a.feasible();
    if (a.feasible()) return a.objective < b.objective;
    return a.max_violation < b.max_violation;
}

/// Start points for a multistart run: the box center, then uniform draws in
/// the box. Components with an infinite bound come from program.x0 (or 0).
inline std::vector<Vector> multistart_points(const NlpProgram& program, int count, std::uint64_t seed) {
    std::vector<Vector> starts;
    SeededSampler rng(seed, 0x5eed);
    for (int k = 0; k < count; ++k) {
        Vector x(program.n_vars);
        for (Eigen::Index i = 0; i < program.n_vars; ++i) {
            const double lo = program.lower[i], hi = program.upper[i];
            const double fallback = program.x0.size() == program.n_vars ? program.x0[i] : 0.0;
            if (std::isfinite(lo) && std::isfinite(hi))
                x[i] = k == 0 ? 0.5 * (lo + hi) : rng.uniform(lo, hi);
            else
                x[i] = std::clamp(fallback, lo, hi);
        }
        if (program.complete_start) program.complete_start(x);
        starts.push_back(std::move(x));
    }
    return starts;
}

/// Runs `solve` from options.multistart seeded starts and keeps the best.
inline NlpSolution multistart(const NlpProgram& program, const SolverOptions& options) {
    if (options.multistart < 1) throw InvalidInput("multistart count must be at least 1");
    NlpSolution best;
    bool have = false;
    for (const Vector& x0 : multistart_points(program, options.multistart, options.seed)) {
        NlpSolution s;
        try {
            s = solve(program, x0, options);
        } catch (const InvalidStart&) {
            continue;
        }
        if (!have || better_solution(s, best)) {
            best = std::move(s);
            have = true;
        }
    }
    if (!have) throw InvalidStart("no multistart point has finite objective and constraints");
    return best;
}

}  // namespace srd
