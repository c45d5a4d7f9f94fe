#pragma once

// Cost reducers: first-order adversarial perturbations and the sequential
// augmentation of a training set with marginally violating test points.

#include "srd/analysis.hpp"
#include "srd/formulations.hpp"
#include "srd/nlp.hpp"
#include "srd/problem.hpp"
#include "srd/scenario.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace srd {

struct AdversarialPoint {
    Vector point;
    Eigen::Index k_hat = 0;  // requirement that was ascended
    bool tie = false;        // several requirements shared the maximum
    double step = 0.0;       // lambda; 0 for the random fallback
};

/// Index of the largest requirement value; ties go to the smallest index.
inline Eigen::Index worst_requirement(const Vector& r, bool* tie = nullptr) {
    Eigen::Index k = 0;
    for (Eigen::Index j = 1; j < r.size(); ++j)
        if (r[j] > r[k]) k = j;
    if (tie) {
        *tie = false;
        for (Eigen::Index j = 0; j < r.size(); ++j)
            if (j != k && r[j] == r[k]) *tie = true;
    }
    return k;
}

/// delta_n + lambda grad_delta r_k(theta, delta_n) with lambda chosen so the
/// point lies on the sphere of radius mu around delta_n. k is the worst
/// requirement at delta_n. Throws DegenerateGradient when the gradient norm
/// is below 1e-12.
inline AdversarialPoint adversarial_point(const DesignProblem& problem, const Vector& theta_hat, const Vector& delta_n,
                                          double mu, double fd_step = 1e-6) {
    if (!(mu > 0.0)) throw InvalidInput("adversarial radius must be positive");
    if (problem.n_r < 1) throw InvalidInput("adversarial perturbation needs at least one requirement");
    AdversarialPoint a;
    a.k_hat = worst_requirement(problem.requirements(theta_hat, delta_n), &a.tie);
    const Eigen::Index k = a.k_hat;
    const Vector grad = finite_diff_gradient(
        [&](const Vector& d) { return problem.requirements(theta_hat, d)[k]; }, delta_n, fd_step);
    const double norm = grad.norm();
    if (!(norm >= 1e-12)) throw DegenerateGradient("requirement gradient vanishes at this scenario");
    a.step = mu / norm;
    a.point = delta_n + a.step * grad;
    return a;
}

/// adversarial_point, falling back to a random point on the sphere when the
/// gradient is degenerate.
inline AdversarialPoint adversarial_point_or_random(const DesignProblem& problem, const Vector& theta_hat,
                                                    const Vector& delta_n, double mu, SeededSampler& rng,
                                                    double fd_step = 1e-6) {
    try {
        return adversarial_point(problem, theta_hat, delta_n, mu, fd_step);
    } catch (const DegenerateGradient&) {
        AdversarialPoint a;
        a.k_hat = worst_requirement(problem.requirements(theta_hat, delta_n), &a.tie);
        a.point = delta_n + mu * rng.unit_direction(delta_n.size());
        return a;
    }
}

struct ScenarioSelection {
    std::vector<std::size_t> indices;  // closest to the boundary first
    bool warning = false;              // fewer negative-valued scenarios than requested
};

/// The `count` scenarios whose worst requirement value is negative and
/// closest to zero. Scenarios that already fail are skipped.
inline ScenarioSelection select_scenarios(const DesignProblem& problem, const Vector& theta_hat,
                                          const std::vector<Scenario>& scenarios, std::size_t count) {
    if (count > scenarios.size()) throw InvalidInput("cannot select more scenarios than exist");
    std::vector<std::pair<double, std::size_t>> negative;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const double v = problem.max_requirement(theta_hat, scenarios[i]);
        if (v < 0.0) negative.emplace_back(v, i);
    }
    std::stable_sort(negative.begin(), negative.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    ScenarioSelection s;
    s.warning = negative.size() < count;
    for (std::size_t j = 0; j < std::min(count, negative.size()); ++j) s.indices.push_back(negative[j].second);
    return s;
}

/// Which scenarios receive an adversarial point, which requirement each one
/// ascends, and the design the gradients are taken at.
struct PerturbBudget {
    std::vector<int> q;                // 1 for perturbed scenarios
    std::vector<Eigen::Index> k_hat;   // per scenario; meaningful where q = 1
    Vector theta_hat;
    std::vector<double> step_scale;    // lambda of the ascent step, per scenario
    bool selection_warning = false;
    std::size_t ties = 0;
};

/// Multi-point dataset in which each selected scenario carries its nominal
/// point and one adversarial point on the sphere of radius radius(delta);
/// every other scenario carries its nominal point only.
inline MultiPointDataset adversarial_dataset(const DesignProblem& problem, const Vector& theta_hat,
                                             const std::vector<Scenario>& scenarios, std::size_t count,
                                             const RadiusRule& radius, std::uint64_t seed, PerturbBudget* budget = nullptr,
                                             double fd_step = 1e-6) {
    MultiPointDataset d = nominal_dataset(scenarios);
    d.provenance = "adversarial " + radius.description + " count=" + std::to_string(count);
    d.seed = seed;
    PerturbBudget b;
    b.q.assign(scenarios.size(), 0);
    b.k_hat.assign(scenarios.size(), 0);
    b.step_scale.assign(scenarios.size(), 0.0);
    b.theta_hat = theta_hat;
    const ScenarioSelection sel = select_scenarios(problem, theta_hat, scenarios, count);
    b.selection_warning = sel.warning;
    SeededSampler base(seed, 0xad5e);
    for (std::size_t i : sel.indices) {
        const double mu = radius(scenarios[i]);
        d.radii[i] = mu;
        if (!(mu > 0.0)) continue;
        SeededSampler rng = base.substream(i);
        const AdversarialPoint a = adversarial_point_or_random(problem, theta_hat, scenarios[i], mu, rng, fd_step);
        d.points[i].push_back(a.point);
        b.q[i] = 1;
        b.k_hat[i] = a.k_hat;
        b.step_scale[i] = a.step;
        b.ties += a.tie;
    }
    if (budget) *budget = std::move(b);
    return d;
}

enum class SequentialStatus { TargetMet, MaxIter, Anomaly };

inline std::string to_string(SequentialStatus s) {
    switch (s) {
        case SequentialStatus::TargetMet: return "target-met";
        case SequentialStatus::MaxIter: return "max-iter";
        case SequentialStatus::Anomaly: return "anomaly";
    }
    return "unknown";
}

struct SequentialIteration {
    int iteration = 0;
    std::size_t n_u = 0;  // training-set size used for this design
    double objective = 0.0;
    std::size_t sigma = 0;
    Estimate p_hat;       // reliability on the unused part of the pool
    Vector theta;
    SolveStatus solver = SolveStatus::Converged;
};

struct SequentialResult {
    std::vector<SequentialIteration> iterations;
    SequentialStatus status = SequentialStatus::MaxIter;
    std::vector<Scenario> training;
    bool training_iid = true;  // false once pool points were selected into it
};

struct SequentialOptions {
    std::size_t batch = 17;  // n_a
    int max_iterations = 10;
    double target = 0.0;     // stop once p_hat <= target
    double level = 0.95;
};

/// Solve, test on the pool, and append the n_a pool points with the smallest
/// positive worst-requirement values until the estimate meets the target.
/// Appended points leave the pool, so no pool point is used twice.
inline SequentialResult sequential_design(const DesignProblem& problem, const std::vector<Scenario>& initial,
                                          const FormulationSpec& spec, const std::vector<Scenario>& pool,
                                          const SequentialOptions& options, const SolverOptions& solver) {
    if (options.batch < 1) throw InvalidInput("batch size must be at least 1");
    if (pool.empty()) throw InvalidInput("empty test pool");
    SequentialResult res;
    res.training = initial;
    std::vector<std::size_t> remaining(pool.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    DesignProblem current = problem;
    res.status = SequentialStatus::MaxIter;
    for (int it = 1; it <= options.max_iterations; ++it) {
        MultiPointDataset data = nominal_dataset(res.training);
        data.iid = res.training_iid;
        const DesignResult design = solve_design(current, data, spec, solver);
        current.initial_guess = design.theta;

        std::vector<Scenario> test;
        test.reserve(remaining.size());
        for (auto i : remaining) test.push_back(pool[i]);
        SequentialIteration rec;
        rec.iteration = it;
        rec.n_u = res.training.size();
        rec.objective = design.objective;
        rec.sigma = design.outliers.sigma();
        rec.theta = design.theta;
        rec.solver = design.solution.status;
        if (test.empty()) {
            res.iterations.push_back(std::move(rec));
            res.status = SequentialStatus::Anomaly;
            break;
        }
        rec.p_hat = reliability(problem, design.theta, test, options.level);
        const double p_hat = rec.p_hat.p;
        res.iterations.push_back(std::move(rec));
        if (p_hat <= options.target) {
            res.status = SequentialStatus::TargetMet;
            break;
        }
        if (it == options.max_iterations) break;

        std::vector<std::pair<double, std::size_t>> violators;
        for (std::size_t t = 0; t < remaining.size(); ++t) {
            const double v = problem.max_requirement(design.theta, test[t]);
            if (v > 0.0) violators.emplace_back(v, t);
        }
        if (violators.empty()) {
            res.status = SequentialStatus::Anomaly;
            break;
        }
        std::stable_sort(violators.begin(), violators.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t take = std::min(options.batch, violators.size());
        std::vector<std::size_t> chosen;
        for (std::size_t j = 0; j < take; ++j) {
            res.training.push_back(test[violators[j].second]);
            chosen.push_back(violators[j].second);
        }
        res.training_iid = false;
        std::sort(chosen.begin(), chosen.end());
        std::vector<std::size_t> keep;
        keep.reserve(remaining.size() - take);
        for (std::size_t t = 0; t < remaining.size(); ++t)
            if (!std::binary_search(chosen.begin(), chosen.end(), t)) keep.push_back(remaining[t]);
        remaining = std::move(keep);
    }
    return res;
}

}  // namespace srd
