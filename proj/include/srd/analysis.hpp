#pragma once

// Monte Carlo reliability and robustness analysis of a fixed design.

#include "srd/parallel.hpp"
#include "srd/problem.hpp"
#include "srd/random.hpp"
#include "srd/scenario.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace srd {

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
inline std::pair<double, double> binomial_ci(std::size_t successes, std::size_t trials, double level = 0.95) {
    if (trials == 0) throw InvalidInput("binomial_ci needs at least one trial");
    if (successes > trials) throw InvalidInput("successes exceed trials");
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("confidence level must lie in (0, 1)");
    const double a = 0.5 * (1.0 - level);
    const auto x = static_cast<double>(successes), n = static_cast<double>(trials);
    const double lo = successes == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, a);
    const double hi = successes == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - a);
    return {lo, hi};
}

/// A failure-probability estimate with its confidence interval.
struct Estimate {
    std::size_t failures = 0;
    std::size_t trials = 0;
    double p = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    double level = 0.95;

    static Estimate from_counts(std::size_t failures, std::size_t trials, double level) {
        Estimate e;
        e.failures = failures;
        e.trials = trials;
        e.level = level;
        e.p = static_cast<double>(failures) / static_cast<double>(trials);
        std::tie(e.lo, e.hi) = binomial_ci(failures, trials, level);
        return e;
    }

    bool covers(double value) const { return lo <= value && value <= hi; }
};

/// ceil(x) that ignores floating-point noise just above an integer, so that
/// 200 * (1 - 0.95) counts as 10.
inline std::size_t tolerant_ceil(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(std::max(0.0, r));
    return static_cast<std::size_t>(std::max(0.0, std::ceil(x)));
}

/// Fraction of `scenarios` in the failure domain, max_k r_k(theta, delta) > 0.
inline Estimate reliability(const DesignProblem& problem, const Vector& theta, const std::vector<Scenario>& scenarios,
                            double level = 0.95) {
    problem.check_theta(theta);
    if (scenarios.empty()) throw InvalidInput("reliability needs at least one test scenario");
    std::vector<std::uint8_t> fail(scenarios.size());
    parallel_for(
        scenarios.size(), [&](std::size_t i) { fail[i] = problem.max_requirement(theta, scenarios[i]) > 0.0; }, 256);
    std::size_t count = 0;
    for (auto f : fail) count += f;
    return Estimate::from_counts(count, scenarios.size(), level);
}

/// Per-scenario count of failing points among m' draws from its perturbation.
/// Scenario i draws from sub-stream i of `sampler`.
inline std::vector<std::size_t> perturbed_failure_counts(const DesignProblem& problem, const Vector& theta,
                                                         const std::vector<Scenario>& scenarios,
                                                         const PerturbationModel& model, std::size_t m_prime,
                                                         const SeededSampler& sampler) {
    problem.check_theta(theta);
    if (m_prime < 1) throw InvalidInput("m' must be at least 1");
    std::vector<std::size_t> counts(scenarios.size());
    parallel_for(
        scenarios.size(),
        [&](std::size_t i) {
            SeededSampler rng = sampler.substream(i);
            const double mu = model.radius(scenarios[i]);
            std::size_t c = 0;
            for (std::size_t j = 0; j < m_prime; ++j)
                if (problem.max_requirement(theta, model.draw(scenarios[i], mu, rng)) > 0.0) ++c;
            counts[i] = c;
        },
        16);
    return counts;
}

/// Perturbational failure estimate from per-scenario counts: scenario i fails
/// when more than ceil(m' (1 - gamma)) of its points fail.
inline Estimate robustness_from_counts(const std::vector<std::size_t>& counts, std::size_t m_prime, double gamma,
                                       double level = 0.95) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in (0, 1]");
    if (counts.empty()) throw InvalidInput("robustness needs at least one test scenario");
    const std::size_t threshold = tolerant_ceil(static_cast<double>(m_prime) * (1.0 - gamma));
    std::size_t failures = 0;
    for (auto c : counts) failures += c > threshold;
    return Estimate::from_counts(failures, counts.size(), level);
}

inline Estimate robustness(const DesignProblem& problem, const Vector& theta, const std::vector<Scenario>& scenarios,
                           const PerturbationModel& model, std::size_t m_prime, double gamma,
                           const SeededSampler& sampler, double level = 0.95) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in (0, 1]");
    return robustness_from_counts(perturbed_failure_counts(problem, theta, scenarios, model, m_prime, sampler), m_prime,
                                  gamma, level);
}

/// l_k = mean of r_k over the scenarios with r_k > 0, or 0 if there are none.
inline Vector loss_measures(const DesignProblem& problem, const Vector& theta, const std::vector<Scenario>& scenarios) {
    problem.check_theta(theta);
    Vector sum = Vector::Zero(problem.n_r);
    Vector count = Vector::Zero(problem.n_r);
    for (const auto& s : scenarios) {
        const Vector r = problem.requirements(theta, s);
        for (Eigen::Index k = 0; k < r.size(); ++k)
            if (r[k] > 0.0) {
                sum[k] += r[k];
                count[k] += 1.0;
            }
    }
    Vector loss(problem.n_r);
    for (Eigen::Index k = 0; k < loss.size(); ++k) loss[k] = count[k] > 0.0 ? sum[k] / count[k] : 0.0;
    return loss;
}

/// Loss measure of a list of requirement values.
inline double loss_measure(std::span<const double> values) {
    double s = 0.0;
    std::size_t c = 0;
    for (double v : values)
        if (v > 0.0) {
            s += v;
            ++c;
        }
    return c ? s / static_cast<double>(c) : 0.0;
}

struct AnalysisOptions {
    std::size_t m_prime = 200;
    std::vector<double> gammas{0.95};
    double level = 0.95;
    std::uint64_t seed = 1;
};

struct AnalysisReport {
    std::size_t n_prime = 0;
    std::size_t m_prime = 0;
    Estimate p_nom;
    std::vector<std::pair<double, Estimate>> p_per;  // (gamma, estimate)
    std::vector<Estimate> per_requirement;          // P[F_k]
    Vector loss;
    std::optional<double> mean_response;
};

/// Reliability, robustness for each gamma (sharing one set of perturbation
/// draws), per-requirement failure probabilities, losses and mean response.
inline AnalysisReport analyze_design(const DesignProblem& problem, const Vector& theta,
                                     const std::vector<Scenario>& test, const PerturbationModel& model,
                                     const AnalysisOptions& options) {
    problem.check_theta(theta);
    AnalysisReport rep;
    rep.n_prime = test.size();
    rep.m_prime = options.m_prime;
    rep.p_nom = reliability(problem, theta, test, options.level);
    const auto counts = perturbed_failure_counts(problem, theta, test, model, options.m_prime,
                                                 SeededSampler(options.seed, 0x7e57));
    for (double g : options.gammas) rep.p_per.emplace_back(g, robustness_from_counts(counts, options.m_prime, g, options.level));

    std::vector<std::size_t> per_k(static_cast<std::size_t>(problem.n_r));
    for (const auto& s : test) {
        const Vector r = problem.requirements(theta, s);
        for (Eigen::Index k = 0; k < r.size(); ++k) per_k[static_cast<std::size_t>(k)] += r[k] > 0.0;
    }
    for (auto c : per_k) rep.per_requirement.push_back(Estimate::from_counts(c, test.size(), options.level));
    rep.loss = loss_measures(problem, theta, test);
    if (problem.has_response()) {
        double s = 0.0;
        for (const auto& d : test) s += problem.response(theta, d);
        rep.mean_response = s / static_cast<double>(test.size());
    }
    return rep;
}

}  // namespace srd
