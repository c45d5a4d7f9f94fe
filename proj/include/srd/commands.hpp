#pragma once

// Command implementations behind the command-line tool. Each command reads a
// RunConfig, does its work and writes its reports into config.output.

#include "srd/adaptive.hpp"
#include "srd/analysis.hpp"
#include "srd/config.hpp"
#include "srd/demo.hpp"
#include "srd/formulations.hpp"
#include "srd/report.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace srd {

struct DesignReport {
    Vector theta;
    double objective = 0.0;
    std::vector<std::size_t> outliers;
    SolveStatus status = SolveStatus::InfeasiblePoint;
    double max_violation = 0.0;
    std::size_t n = 0;
    std::size_t m = 1;
    double wall_seconds = 0.0;
    std::string config_hash;

    std::size_t sigma() const { return outliers.size(); }
    bool converged() const { return status == SolveStatus::Converged; }
};

namespace detail {

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

// Timing goes to a plain-text log so the CSV reports stay byte-identical
// across runs.
inline void append_log(const std::filesystem::path& dir, const std::string& line) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "run_log.txt", std::ios::app);
    if (!out) throw IoError("cannot write run log in '" + dir.string() + "'");
    out << line << '\n';
}

inline std::vector<std::string> delta_names(Eigen::Index n) {
    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < n; ++k) names.push_back("d" + std::to_string(k + 1));
    return names;
}

inline DesignProblem prepared_problem(const RunConfig& c, const std::vector<Scenario>& training) {
    DesignProblem p = make_problem(c);
    if (p.name == "enclosure" && !training.empty()) p.initial_guess = enclosure_initial_guess(training);
    return p;
}

/// Point classification table for any problem: one row per training point.
inline CsvTable classification_table(const DesignProblem& problem, const MultiPointDataset& data, const Vector& theta,
                                     const OutlierReport& outliers) {
    std::vector<std::string> header{"scenario", "point"};
    for (const auto& n : delta_names(problem.n_delta)) header.push_back(n);
    header.push_back("class");
    CsvTable t(header);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < data.m(i); ++j) {
            const Vector& p = data.points[i][j];
            std::vector<std::string> row{cell(i), cell(j)};
            for (Eigen::Index k = 0; k < p.size(); ++k) row.push_back(cell(p[k]));
            row.push_back(classify_point(problem, theta, p, outliers.is_outlier(i)));
            t.add_row(std::move(row));
        }
    return t;
}

}  // namespace detail

/// Training dataset from the configured perturbation model. The adversarial
/// radius rule needs a reference design: the nominal (m = 1) solution of the
/// same formulation, which is returned through `reference`.
inline MultiPointDataset training_dataset(const RunConfig& c, const DesignProblem& problem,
                                          const std::vector<Scenario>& scenarios, std::optional<Vector>* reference) {
    if (c.perturbation.m == 1) return nominal_dataset(scenarios);
    const Vector* theta_ref = nullptr;
    Vector ref;
    if (c.perturbation.radius_rule == "adversarial") {
        ref = solve_design(problem, nominal_dataset(scenarios), c.formulation, c.solver).theta;
        theta_ref = &ref;
        if (reference) *reference = ref;
    }
    return expand(scenarios, make_perturbation(c, problem, theta_ref), c.perturbation.m,
                  SeededSampler(c.perturbation.seed, 0x9e27));
}

inline DesignReport cmd_design(const RunConfig& c) {
    detail::Stopwatch clock;
    const std::string hash = config_hash(c);
    const std::vector<Scenario> scenarios = training_scenarios(c, make_problem(c));
    if (scenarios.empty()) throw InvalidInput("no training scenarios");
    DesignProblem problem = detail::prepared_problem(c, scenarios);
    std::optional<Vector> reference;
    const MultiPointDataset data = training_dataset(c, problem, scenarios, &reference);
    if (reference) problem.initial_guess = *reference;
    const DesignResult r = solve_design(problem, data, c.formulation, c.solver);

    DesignReport rep;
    rep.theta = r.theta;
    rep.objective = r.objective;
    rep.outliers = r.outliers.outliers;
    rep.status = r.solution.status;
    rep.max_violation = r.solution.max_violation;
    rep.n = data.size();
    rep.m = c.perturbation.m;
    rep.config_hash = hash;

    const std::filesystem::path out(c.output);
    CsvTable t({"problem", "synthetic", "formulation", "n", "m", "sigma", "objective", "status", "max_violation",
                "outliers"});
    t.add(problem.name, problem.synthetic ? "yes" : "no", to_string(c.formulation.kind), rep.n, rep.m, rep.sigma(),
          rep.objective, to_string(rep.status), rep.max_violation, join(rep.outliers));
    t.write(out / "design.csv", hash);
    write_theta(out / "theta.csv", rep.theta, hash);
    detail::classification_table(problem, data, r.theta, r.outliers).write(out / "classification.csv", hash);
    rep.wall_seconds = clock.seconds();
    detail::append_log(out, "design config=" + hash + " wall_seconds=" + format_real(rep.wall_seconds));
    return rep;
}

/// Reliability and robustness of the design stored at `design_path`.
inline AnalysisReport cmd_analyze(const RunConfig& c, const std::string& design_path) {
    detail::Stopwatch clock;
    const std::string hash = config_hash(c);
    const DesignProblem problem = make_problem(c);
    const Vector theta = read_theta(design_path);
    if (theta.size() != problem.n_theta)
        throw InvalidInput("design file '" + design_path + "' has dimension " + std::to_string(theta.size()) +
                           " but problem '" + problem.name + "' has dimension " + std::to_string(problem.n_theta));
    const std::vector<Scenario> test = test_scenarios(c, problem);
    AnalysisOptions ao;
    ao.m_prime = c.analysis.m_prime;
    ao.gammas = c.analysis.gammas;
    ao.level = c.analysis.level;
    ao.seed = c.analysis.seed;
    const AnalysisReport rep = analyze_design(problem, theta, test, make_perturbation(c, problem, &theta), ao);

    const std::filesystem::path out(c.output);
    const double J = problem.objective(theta);
    CsvTable t2({"objective", "n_prime", "m_prime", "p_nom", "p_nom_lo", "p_nom_hi", "gamma", "p_per", "p_per_lo",
                 "p_per_hi"});
    for (const auto& [g, e] : rep.p_per)
        t2.add(J, rep.n_prime, rep.m_prime, rep.p_nom.p, rep.p_nom.lo, rep.p_nom.hi, g, e.p, e.lo, e.hi);
    t2.write(out / "failure_probabilities.csv", hash);

    std::vector<std::string> h3{"n_prime", "mean_response"};
    for (std::size_t k = 1; k <= rep.per_requirement.size(); ++k) {
        const auto s = std::to_string(k);
        h3.insert(h3.end(), {"p_fail_" + s, "p_fail_" + s + "_lo", "p_fail_" + s + "_hi"});
    }
    h3.insert(h3.end(), {"p_fail", "p_fail_lo", "p_fail_hi"});
    for (Eigen::Index k = 1; k <= rep.loss.size(); ++k) h3.push_back("loss_" + std::to_string(k));
    CsvTable t3(h3);
    std::vector<std::string> row{cell(rep.n_prime), rep.mean_response ? cell(*rep.mean_response) : "NA"};
    for (const auto& e : rep.per_requirement) row.insert(row.end(), {cell(e.p), cell(e.lo), cell(e.hi)});
    row.insert(row.end(), {cell(rep.p_nom.p), cell(rep.p_nom.lo), cell(rep.p_nom.hi)});
    for (Eigen::Index k = 0; k < rep.loss.size(); ++k) row.push_back(cell(rep.loss[k]));
    t3.add_row(std::move(row));
    t3.write(out / "requirement_failures.csv", hash);
    detail::append_log(out, "analyze config=" + hash + " wall_seconds=" + format_real(clock.seconds()));
    return rep;
}

inline SequentialResult cmd_sequential(const RunConfig& c) {
    detail::Stopwatch clock;
    const std::string hash = config_hash(c);
    const DesignProblem base = make_problem(c);
    const std::vector<Scenario> initial = training_scenarios(c, base);
    const std::vector<Scenario> pool = pool_scenarios(c, base);
    const DesignProblem problem = detail::prepared_problem(c, initial);
    SequentialOptions so;
    so.batch = c.sequential.batch;
    so.max_iterations = c.sequential.max_iterations;
    so.target = c.sequential.target;
    so.level = c.analysis.level;
    const SequentialResult res = sequential_design(problem, initial, c.formulation, pool, so, c.solver);

    const std::filesystem::path out(c.output);
    CsvTable trace({"iteration", "n_u", "objective", "sigma", "p_hat", "p_hat_lo", "p_hat_hi", "test_size",
                    "solver_status"});
    for (const auto& it : res.iterations)
        trace.add(it.iteration, it.n_u, it.objective, it.sigma, it.p_hat.p, it.p_hat.lo, it.p_hat.hi, it.p_hat.trials,
                  to_string(it.solver));
    trace.write(out / "sequential_trace.csv", hash);
    CsvTable summary({"problem", "synthetic", "status", "iterations", "final_n_u", "training_iid"});
    summary.add(problem.name, problem.synthetic ? "yes" : "no", to_string(res.status), res.iterations.size(),
                res.training.size(), res.training_iid ? "yes" : "no");
    summary.write(out / "sequential_summary.csv", hash);
    if (!res.iterations.empty()) write_theta(out / "theta.csv", res.iterations.back().theta, hash);
    std::ostringstream training;
    write_scenarios_csv(training, res.training, detail::delta_names(problem.n_delta));
    write_atomic(out / "training.csv", "# srd " + std::string(kVersion) + " config=" + hash + "\n" + training.str());
    detail::append_log(out, "sequential config=" + hash + " wall_seconds=" + format_real(clock.seconds()));
    return res;
}

struct DemoBundle {
    SmallSweep small;
    std::optional<LargeSweep> large;
};

namespace detail {

inline std::string cell_status(const SweepDesign& d) {
    if (!d.result) return "error";
    return to_string(d.result->solution.status);
}

inline std::string cell_note(const SweepDesign& d) {
    if (!d.error.empty()) return d.error;
    if (d.result && !d.sigma_matched) return "sigma differs from the requested " + std::to_string(d.cell.sigma);
    return "";
}

inline void add_theta_cells(std::vector<std::string>& row, const SweepDesign& d) {
    for (int k = 0; k < 6; ++k) row.push_back(d.result ? cell(d.result->theta[k]) : "NA");
}

}  // namespace detail

/// Runs both enclosure sweeps and writes small_sweep.csv, large_sweep.csv and one
/// point-classification file per design. Cells that fail are marked and the
/// sweep continues.
inline DemoBundle cmd_demo_enclosure(const RunConfig& c) {
    detail::Stopwatch clock;
    const std::string hash = config_hash(c);
    const std::filesystem::path out(c.output);
    const DesignProblem problem = enclosure_problem(c.demo.enclosure);
    const std::vector<std::string> theta_cols{"c1x", "c1y", "u1", "c2x", "c2y", "u2"};
    DemoBundle b;
    b.small = run_small_sweep(c.demo);

    std::vector<std::string> h1{"design", "formulation", "m", "sigma", "J", "rho", "alpha", "status", "note"};
    h1.insert(h1.end(), theta_cols.begin(), theta_cols.end());
    CsvTable t1(h1);
    for (const auto& d : b.small.designs) {
        std::vector<std::string> row{d.cell.label,
                                     to_string(d.cell.kind),
                                     cell(d.cell.m),
                                     d.result ? cell(d.sigma()) : "NA",
                                     d.result ? cell(d.objective()) : "NA",
                                     d.spec.rho.empty() ? "" : cell(d.spec.rho[0]),
                                     join(d.spec.alpha),
                                     detail::cell_status(d),
                                     detail::cell_note(d)};
        detail::add_theta_cells(row, d);
        t1.add_row(std::move(row));
        if (d.result)
            detail::classification_table(problem, d.data, d.result->theta, d.result->outliers)
                .write(out / ("points_" + d.cell.label + ".csv"), hash);
    }
    t1.write(out / "small_sweep.csv", hash);
    std::ostringstream small;
    write_scenarios_csv(small, b.small.scenarios, {"d1", "d2"});
    write_atomic(out / "small_scenarios.csv", "# srd " + std::string(kVersion) + " config=" + hash + "\n" + small.str());

    if (c.demo.run_large) {
        b.large = run_large_sweep(c.demo);
        std::vector<std::string> h2{"design", "m", "sigma_over_n", "J", "p_nom", "p_nom_lo", "p_nom_hi",
                                    "p_per", "p_per_lo", "p_per_hi", "status", "note"};
        h2.insert(h2.end(), theta_cols.begin(), theta_cols.end());
        CsvTable t2(h2);
        for (const auto& ld : b.large->designs) {
            const auto& d = ld.design;
            std::vector<std::string> row{d.cell.label, cell(ld.m),
                                         d.result ? cell(static_cast<double>(d.sigma()) / static_cast<double>(c.demo.large_n)) : "NA",
                                         d.result ? cell(d.objective()) : "NA"};
            if (ld.analysis) {
                const auto& a = *ld.analysis;
                const auto& per = a.p_per.front().second;
                row.insert(row.end(), {cell(a.p_nom.p), cell(a.p_nom.lo), cell(a.p_nom.hi), cell(per.p), cell(per.lo),
                                       cell(per.hi)});
            } else {
                row.insert(row.end(), 6, "NA");
            }
            row.push_back(detail::cell_status(d));
            row.push_back(detail::cell_note(d));
            detail::add_theta_cells(row, d);
            t2.add_row(std::move(row));
            if (d.result)
                detail::classification_table(problem, d.data, d.result->theta, d.result->outliers)
                    .write(out / ("points_" + d.cell.label + ".csv"), hash);
        }
        t2.write(out / "large_sweep.csv", hash);
    }
    detail::append_log(out, "demo-enclosure config=" + hash + " wall_seconds=" + format_real(clock.seconds()));
    return b;
}

/// The default configuration as indented JSON.
inline std::string template_json() { return to_json(default_config()).dump(2) + "\n"; }

}  // namespace srd
