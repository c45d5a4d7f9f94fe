#pragma once

// Data-enclosure sweeps: ten designs on a small ring dataset with one planted
// outlier, and four designs on a large ring dataset followed by reliability
// and robustness analysis against adversarially sized perturbations.

#include "srd/analysis.hpp"
#include "srd/formulations.hpp"
#include "srd/problems/enclosure.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace srd {

struct SweepCell {
    std::string label;
    FormulationKind kind = FormulationKind::WorstCase;
    std::size_t m = 1;
    std::size_t sigma = 0;  // requested outlier count
    PerturbationKind perturbation = PerturbationKind::BallVolume;
};

struct SweepDesign {
    SweepCell cell;
    std::optional<DesignResult> result;  // empty when the cell threw
    FormulationSpec spec;
    bool sigma_matched = false;
    std::vector<double> rho_tried;
    std::string error;
    MultiPointDataset data;

    bool ok() const { return result.has_value() && result->solution.feasible(); }
    double objective() const {
        return result ? result->objective : std::numeric_limits<double>::quiet_NaN();
    }
    std::size_t sigma() const { return result ? result->outliers.sigma() : 0; }
};

struct DemoOptions {
    EnclosureOptions enclosure;
    RingMechanism ring{2.5, 0.25, 8.0};

    // small dataset
    std::size_t small_n = 15;
    std::uint64_t small_seed = 13;
    std::vector<Scenario> planted{(Scenario(2) << -3.7, -0.4).finished()};
    double radius_factor = 0.1;  // perturbation radius = factor * distance to the origin
    std::size_t m = 81;
    double gamma = 0.95;
    double rho_cover = 100.0;  // penalty for designs that keep every scenario
    std::vector<double> rho_scan{30, 20, 15, 10, 7, 5, 3, 2, 1};
    int rho_refine = 5;

    // large dataset
    bool run_large = true;
    std::size_t large_n = 500;
    std::uint64_t large_seed = 21;
    std::size_t large_sigma = 25;
    std::size_t large_m = 81;
    double r_max = 0.35;
    std::size_t n_prime = 20000;
    std::size_t m_prime = 200;
    double level = 0.95;
    std::uint64_t analysis_seed = 5;

    SolverOptions solver = [] {
        SolverOptions s;
        s.fd_step = 1e-2;  // the area estimate is piecewise linear on a scale of ~1e-4
        s.multistart = 4;
        s.seed = 3;
        return s;
    }();
    int large_multistart = 2;
};

/// The ten cells of the small-dataset sweep.
inline std::vector<SweepCell> small_sweep_cells(std::size_t m) {
    using K = FormulationKind;
    using P = PerturbationKind;
    return {
        {"theta1", K::WorstCase, 1, 0, P::BallSurface},
        {"theta2", K::WorstCase, 1, 1, P::BallSurface},
        {"theta3", K::RiskAgnosticScenario, 1, 1, P::BallVolume},
        {"theta4", K::RiskAgnosticScenario, 1, 2, P::BallVolume},
        {"theta5", K::WorstCase, m, 0, P::BallSurface},
        {"theta6", K::WorstCase, m, 1, P::BallSurface},
        {"theta7", K::RiskAverseScenario, m, 0, P::BallVolume},
        {"theta8", K::RiskAverseScenario, m, 1, P::BallVolume},
        {"theta9", K::RiskAgnosticRequirement, m, 1, P::BallVolume},
        {"theta10", K::RiskAgnosticRequirement, m, 2, P::BallVolume},
    };
}

/// The small dataset: planted scenarios first, then ring draws.
inline std::vector<Scenario> small_dataset(const DemoOptions& o) {
    if (o.planted.size() > o.small_n) throw ConfigError("more planted scenarios than small_n");
    std::vector<Scenario> data = o.planted;
    SeededSampler rng(o.small_seed, 0xda7a);
    auto drawn = o.ring.sample(o.small_n - o.planted.size(), rng);
    data.insert(data.end(), drawn.begin(), drawn.end());
    return data;
}

inline std::vector<Scenario> large_dataset(const DemoOptions& o) {
    SeededSampler rng(o.large_seed, 0xda7a);
    return o.ring.sample(o.large_n, rng);
}

inline std::vector<Scenario> large_test_set(const DemoOptions& o) {
    SeededSampler rng(o.large_seed, 0x7e57da7a);
    return o.ring.sample(o.n_prime, rng);
}

namespace detail {

inline SweepDesign solve_cell(const DesignProblem& problem, const MultiPointDataset& data, const SweepCell& cell,
                              FormulationSpec spec, const SolverOptions& solver) {
    SweepDesign d;
    d.cell = cell;
    d.spec = spec;
    d.data = data;
    try {
        d.result = solve_design(problem, data, spec, solver);
        d.sigma_matched = d.result->outliers.sigma() == cell.sigma;
    } catch (const std::exception& e) {
        d.error = e.what();
    }
    return d;
}

// Risk-averse cells choose the outlier count through rho: sigma = 0 uses a
// large penalty; otherwise rho is lowered along the scan until at least the
// requested count appears, then refined geometrically when it overshoots.
inline SweepDesign solve_risk_averse_cell(const DesignProblem& problem, const MultiPointDataset& data,
                                          const SweepCell& cell, FormulationSpec spec, const DemoOptions& o) {
    auto attempt = [&](double rho, std::vector<double>& tried) {
        spec.rho = {rho};
        tried.push_back(rho);
        return solve_cell(problem, data, cell, spec, o.solver);
    };
    std::vector<double> tried;
    if (cell.sigma == 0) {
        SweepDesign d = attempt(o.rho_cover, tried);
        d.rho_tried = tried;
        return d;
    }
    std::optional<SweepDesign> best;  // closest count seen so far
    auto consider = [&](SweepDesign d) {
        if (!d.result) {
            if (!best) best = std::move(d);
            return;
        }
        const auto dist = [&](const SweepDesign& x) {
            return x.result ? static_cast<long>(x.sigma()) - static_cast<long>(cell.sigma) : 1L << 30;
        };
        if (!best || std::labs(dist(d)) < std::labs(dist(*best))) best = std::move(d);
    };
    double above = o.rho_cover;  // largest rho known to give fewer outliers
    for (double rho : o.rho_scan) {
        SweepDesign d = attempt(rho, tried);
        const bool enough = d.result && d.sigma() >= cell.sigma;
        const bool exact = d.sigma_matched;
        consider(std::move(d));
        if (exact) break;
        if (!enough) {
            above = rho;
            continue;
        }
        double lo = rho, hi = above;
        for (int k = 0; k < o.rho_refine && !best->sigma_matched; ++k) {
            const double mid = std::sqrt(lo * hi);
            SweepDesign e = attempt(mid, tried);
            const bool more = e.result && e.sigma() > cell.sigma;
            const bool fewer = e.result && e.sigma() < cell.sigma;
            consider(std::move(e));
            if (more) lo = mid;
            else if (fewer) hi = mid;
            else break;
        }
        break;
    }
    best->rho_tried = tried;
    return std::move(*best);
}

}  // namespace detail

struct SmallSweep {
    std::vector<Scenario> scenarios;
    std::vector<SweepDesign> designs;

    const SweepDesign& at(const std::string& label) const {
        for (const auto& d : designs)
            if (d.cell.label == label) return d;
        throw InvalidInput("no design labelled '" + label + "'");
    }
};

inline SmallSweep run_small_sweep(const DemoOptions& o) {
    SmallSweep sweep;
    sweep.scenarios = small_dataset(o);
    DesignProblem problem = enclosure_problem(o.enclosure);
    problem.initial_guess = enclosure_initial_guess(sweep.scenarios);
    const double n = static_cast<double>(sweep.scenarios.size());
    const RadiusRule radius = RadiusRule::proportional(o.radius_factor);

    for (const SweepCell& cell : small_sweep_cells(o.m)) {
        MultiPointDataset data;
        if (cell.m == 1) {
            data = nominal_dataset(sweep.scenarios);
        } else {
            const PerturbationModel model{cell.perturbation, radius};
            data = expand(sweep.scenarios, model, cell.m,
                          SeededSampler(o.small_seed, cell.perturbation == PerturbationKind::BallSurface ? 0x81 : 0x82));
        }
        FormulationSpec spec;
        spec.kind = cell.kind;
        const double a = static_cast<double>(cell.sigma) / n;
        switch (cell.kind) {
            case FormulationKind::RiskAgnosticScenario:
                spec.alpha = {a};
                spec.gamma = {cell.m == 1 ? 1.0 : o.gamma};
                sweep.designs.push_back(detail::solve_cell(problem, data, cell, spec, o.solver));
                break;
            case FormulationKind::RiskAgnosticRequirement:
                // the planted outlier lies outside the outer circle: relax r1 only
                spec.alpha = {a, 0.0};
                spec.gamma = {cell.m == 1 ? 1.0 : o.gamma};
                sweep.designs.push_back(detail::solve_cell(problem, data, cell, spec, o.solver));
                break;
            case FormulationKind::RiskAverseScenario:
                spec.gamma = {o.gamma};
                sweep.designs.push_back(detail::solve_risk_averse_cell(problem, data, cell, spec, o));
                break;
            default:
                sweep.designs.push_back(detail::solve_risk_averse_cell(problem, data, cell, spec, o));
                break;
        }
    }
    return sweep;
}

struct LargeDesign {
    SweepDesign design;
    std::optional<AnalysisReport> analysis;
    std::size_t m = 1;
};

struct LargeSweep {
    std::vector<Scenario> scenarios;
    std::vector<LargeDesign> designs;  // A, B, C, D

    const LargeDesign& at(const std::string& label) const {
        for (const auto& d : designs)
            if (d.design.cell.label == label) return d;
        throw InvalidInput("no design labelled '" + label + "'");
    }
};

/// Perturbation used to analyze (and to train the robust designs of) the
/// large sweep: uniform in a disc of adversarial radius at `theta`.
inline PerturbationModel large_perturbation(const DesignProblem& problem, const Vector& theta, double r_max) {
    return {PerturbationKind::BallVolume, adversarial_rule(problem, theta, r_max)};
}

inline LargeSweep run_large_sweep(const DemoOptions& o) {
    LargeSweep sweep;
    sweep.scenarios = large_dataset(o);
    const std::vector<Scenario> test = large_test_set(o);
    DesignProblem problem = enclosure_problem(o.enclosure);
    problem.initial_guess = enclosure_initial_guess(sweep.scenarios);
    SolverOptions solver = o.solver;
    solver.multistart = o.large_multistart;
    const double alpha = static_cast<double>(o.large_sigma) / static_cast<double>(o.large_n);

    auto spec_for = [&](std::size_t sigma) {
        FormulationSpec s;
        s.kind = FormulationKind::RiskAgnosticScenario;
        s.alpha = {sigma ? alpha : 0.0};
        s.gamma = {o.gamma};
        return s;
    };
    using K = FormulationKind;
    const SweepCell cells[] = {
        {"A", K::RiskAgnosticScenario, 1, o.large_sigma, PerturbationKind::BallVolume},
        {"B", K::RiskAgnosticScenario, 1, 0, PerturbationKind::BallVolume},
        {"C", K::RiskAgnosticScenario, o.large_m, o.large_sigma, PerturbationKind::BallVolume},
        {"D", K::RiskAgnosticScenario, o.large_m, 0, PerturbationKind::BallVolume},
    };
    const MultiPointDataset nominal = nominal_dataset(sweep.scenarios);
    for (const SweepCell& cell : cells) {
        LargeDesign ld;
        ld.m = cell.m;
        if (cell.m == 1) {
            ld.design = detail::solve_cell(problem, nominal, cell, spec_for(cell.sigma), solver);
        } else {
            // perturbation radii come from the matching single-point design, which also seeds the solve
            const LargeDesign& base = sweep.designs[cell.sigma ? 0 : 1];
            if (!base.design.result) {
                ld.design.cell = cell;
                ld.design.error = "single-point counterpart failed";
                sweep.designs.push_back(std::move(ld));
                continue;
            }
            const Vector& seed_theta = base.design.result->theta;
            DesignProblem warm = problem;
            warm.initial_guess = seed_theta;
            const MultiPointDataset data =
                expand(sweep.scenarios, large_perturbation(problem, seed_theta, o.r_max), cell.m,
                       SeededSampler(o.large_seed, cell.sigma ? 0xc : 0xd));
            ld.design = detail::solve_cell(warm, data, cell, spec_for(cell.sigma), solver);
        }
        if (ld.design.result) {
            AnalysisOptions ao;
            ao.m_prime = o.m_prime;
            ao.gammas = {o.gamma};
            ao.level = o.level;
            ao.seed = o.analysis_seed;
            const Vector& th = ld.design.result->theta;
            ld.analysis = analyze_design(problem, th, test, large_perturbation(problem, th, o.r_max), ao);
        }
        sweep.designs.push_back(std::move(ld));
    }
    return sweep;
}

/// Point classification for plotting: a point that fails is "failed-point",
/// otherwise it takes the class of its scenario.
inline std::string classify_point(const DesignProblem& problem, const Vector& theta, const Vector& point,
                                  bool scenario_is_outlier) {
    if (!problem.succeeds(theta, point)) return "failed-point";
    return scenario_is_outlier ? "outlier" : "inlier";
}

}  // namespace srd
