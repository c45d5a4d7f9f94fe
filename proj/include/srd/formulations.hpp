#pragma once

// Compiles a DesignProblem, a MultiPointDataset and a FormulationSpec into an
// NlpProgram. Every program is canonicalized to g(x) <= 0; slack bounds are
// box bounds. Problem-level design constraints are appended unrelaxed.

#include "srd/ecdf.hpp"
#include "srd/nlp.hpp"
#include "srd/problem.hpp"
#include "srd/scenario.hpp"

#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace srd {

enum class FormulationKind {
    RiskAverseScenario,
    WorstCase,
    RiskAverseRequirement,
    RiskAgnosticScenario,
    RiskAgnosticRequirement,
    MomentRiskAverse,
    MomentRiskAgnostic,
};

inline std::string to_string(FormulationKind k) {
    switch (k) {
        case FormulationKind::RiskAverseScenario: return "risk-averse-scenario";
        case FormulationKind::WorstCase: return "worst-case";
        case FormulationKind::RiskAverseRequirement: return "risk-averse-requirement";
        case FormulationKind::RiskAgnosticScenario: return "risk-agnostic-scenario";
        case FormulationKind::RiskAgnosticRequirement: return "risk-agnostic-requirement";
        case FormulationKind::MomentRiskAverse: return "moment-risk-averse";
        case FormulationKind::MomentRiskAgnostic: return "moment-risk-agnostic";
    }
    return "unknown";
}

inline FormulationKind parse_formulation_kind(std::string_view s) {
    for (auto k : {FormulationKind::RiskAverseScenario, FormulationKind::WorstCase,
                   FormulationKind::RiskAverseRequirement, FormulationKind::RiskAgnosticScenario,
                   FormulationKind::RiskAgnosticRequirement, FormulationKind::MomentRiskAverse,
                   FormulationKind::MomentRiskAgnostic})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown formulation '" + std::string(s) + "'");
}

inline bool is_risk_averse(FormulationKind k) {
    return k == FormulationKind::RiskAverseScenario || k == FormulationKind::WorstCase ||
           k == FormulationKind::RiskAverseRequirement || k == FormulationKind::MomentRiskAverse;
}

/// Program selection and its parameters. Empty vectors mean "not given".
/// gamma may hold a single value, which then applies to every requirement.
struct FormulationSpec {
    FormulationKind kind = FormulationKind::WorstCase;
    std::vector<double> rho;
    std::vector<double> gamma;
    std::vector<double> alpha;
    double kappa = 1.0;

    Vector gamma_for(Eigen::Index n_r) const {
        if (gamma.empty()) return Vector::Ones(n_r);
        if (gamma.size() == 1) return Vector::Constant(n_r, gamma[0]);
        if (static_cast<Eigen::Index>(gamma.size()) != n_r)
            throw ConfigError("gamma has " + std::to_string(gamma.size()) + " entries but the problem has " +
                              std::to_string(n_r) + " requirements");
        return to_vector(gamma);
    }
};

/// Problems found in `spec` for the given requirement count, all at once.
inline std::vector<std::string> validate(const FormulationSpec& spec, Eigen::Index n_r) {
    std::vector<std::string> errors;
    const auto nr = static_cast<std::size_t>(n_r);
    auto need_scalar = [&](const std::vector<double>& v, const char* name) {
        if (v.size() != 1) errors.push_back(std::string(name) + " must be a single value for " + to_string(spec.kind));
    };
    auto need_vector = [&](const std::vector<double>& v, const char* name) {
        if (v.size() != nr)
            errors.push_back(std::string(name) + " needs " + std::to_string(nr) + " entries for " +
                             to_string(spec.kind) + ", got " + std::to_string(v.size()));
    };
    switch (spec.kind) {
        case FormulationKind::RiskAverseScenario:
        case FormulationKind::WorstCase:
        case FormulationKind::MomentRiskAverse: need_scalar(spec.rho, "rho"); break;
        case FormulationKind::RiskAverseRequirement: need_vector(spec.rho, "rho"); break;
        case FormulationKind::RiskAgnosticScenario:
        case FormulationKind::MomentRiskAgnostic: need_scalar(spec.alpha, "alpha"); break;
        case FormulationKind::RiskAgnosticRequirement: need_vector(spec.alpha, "alpha"); break;
    }
    for (double r : spec.rho)
        if (!(r >= 0.0) || !std::isfinite(r)) errors.push_back("rho must be finite and non-negative");
    for (double a : spec.alpha)
        if (!(a >= 0.0 && a < 1.0)) errors.push_back("alpha must lie in [0, 1)");
    for (double g : spec.gamma)
        if (!(g > 0.0 && g <= 1.0)) errors.push_back("gamma must lie in (0, 1]");
    if (!spec.gamma.empty() && spec.gamma.size() != 1 && spec.gamma.size() != nr)
        errors.push_back("gamma needs 1 or " + std::to_string(nr) + " entries");
    if ((spec.kind == FormulationKind::MomentRiskAverse) && !(spec.kappa >= 1.0))
        errors.push_back("kappa must be at least 1");
    return errors;
}

inline void require_valid(const FormulationSpec& spec, Eigen::Index n_r) {
    auto errors = validate(spec, n_r);
    if (errors.empty()) return;
    std::string msg = errors.front();
    for (std::size_t i = 1; i < errors.size(); ++i) msg += "; " + errors[i];
    throw ConfigError(msg);
}

/// Q(i, k): the gamma_k-quantile of r_k over the m(i) points of scenario i.
/// With m(i) = 1 this is r_k(theta, delta^(i)) itself.
inline Eigen::MatrixXd scenario_quantiles(const DesignProblem& problem, const MultiPointDataset& data,
                                          const Vector& theta, const Vector& gamma) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index nr = problem.n_r;
    Eigen::MatrixXd q(n, nr);
    std::vector<double> r(static_cast<std::size_t>(nr));
    std::vector<std::vector<double>> values(static_cast<std::size_t>(nr));
    std::vector<double> scratch;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pts = data.points[static_cast<std::size_t>(i)];
        for (auto& v : values) v.clear();
        for (const auto& p : pts) {
            problem.requirements_fn(theta, p, r);
            for (Eigen::Index k = 0; k < nr; ++k) values[static_cast<std::size_t>(k)].push_back(r[static_cast<std::size_t>(k)]);
        }
        for (Eigen::Index k = 0; k < nr; ++k) q(i, k) = quantile(values[static_cast<std::size_t>(k)], gamma[k], scratch);
    }
    return q;
}

/// Z_i = max_k Q(i, k), the worst per-requirement quantile of each scenario.
inline Vector worst_quantiles(const DesignProblem& problem, const MultiPointDataset& data, const Vector& theta,
                              const Vector& gamma) {
    if (problem.n_r == 0) return Vector::Constant(static_cast<Eigen::Index>(data.size()), -std::numeric_limits<double>::infinity());
    return scenario_quantiles(problem, data, theta, gamma).rowwise().maxCoeff();
}

/// Per-scenario mean of h over the points of each scenario.
inline Vector scenario_means(const DesignProblem& problem, const MultiPointDataset& data, const Vector& theta) {
    if (!problem.has_response()) throw ConfigError("problem '" + problem.name + "' defines no response");
    Vector u(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        double s = 0.0;
        for (const auto& p : data.points[i]) s += problem.response(theta, p);
        u[static_cast<Eigen::Index>(i)] = s / static_cast<double>(data.m(i));
    }
    return u;
}

/// sum_i w_i * mean_j h(theta, delta^(i,j)) / sum_i w_i. With equal m(i) this
/// is sum_ij h w_i / (m sum_i w_i).
inline double weighted_mean(const DesignProblem& problem, const MultiPointDataset& data, const Vector& theta,
                            std::span<const double> weights) {
    if (weights.size() != data.size()) throw InvalidInput("one weight per scenario is required");
    const Vector u = scenario_means(problem, data, theta);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw InvalidInput("weights must be non-negative");
        num += weights[i] * u[static_cast<Eigen::Index>(i)];
        den += weights[i];
    }
    if (!(den > 0.0)) throw InvalidInput("weights sum to zero");
    return num / den;
}

struct OutlierReport {
    std::vector<std::size_t> outliers;
    std::vector<std::size_t> inliers;
    Vector worst_quantile;  // Z_i per scenario

    std::size_t sigma() const { return outliers.size(); }
    bool is_outlier(std::size_t i) const { return std::binary_search(outliers.begin(), outliers.end(), i); }
};

/// Scenarios whose worst gamma_k-quantile exceeds `tolerance` at `theta`.
/// The tolerance absorbs the solver's constraint tolerance.
inline OutlierReport extract_outliers(const DesignProblem& problem, const MultiPointDataset& data, const Vector& theta,
                                      const Vector& gamma, double tolerance = 1e-6) {
    problem.check_theta(theta);
    OutlierReport rep;
    rep.worst_quantile = worst_quantiles(problem, data, theta, gamma);
    for (std::size_t i = 0; i < data.size(); ++i)
        (rep.worst_quantile[static_cast<Eigen::Index>(i)] > tolerance ? rep.outliers : rep.inliers).push_back(i);
    return rep;
}

namespace detail {

struct BuildContext {
    DesignProblem problem;
    MultiPointDataset data;
    Vector gamma;
};

inline Eigen::Index design_constraint_count(const DesignProblem& p) {
    return p.design_constraints ? p.n_design_constraints : 0;
}

inline void append_design_constraints(const DesignProblem& p, const Vector& theta, std::span<double> out) {
    if (design_constraint_count(p)) p.design_constraints(theta, out);
}

inline NlpProgram base_program(const DesignProblem& p, Eigen::Index extra) {
    NlpProgram prog;
    prog.n_vars = p.n_theta + extra;
    prog.lower = Vector::Constant(prog.n_vars, -std::numeric_limits<double>::infinity());
    prog.upper = Vector::Constant(prog.n_vars, std::numeric_limits<double>::infinity());
    prog.lower.head(p.n_theta) = p.theta_lower;
    prog.upper.head(p.n_theta) = p.theta_upper;
    prog.layout.theta_offset = 0;
    prog.layout.n_theta = p.n_theta;
    return prog;
}

inline void add_xi(NlpProgram& prog, Eigen::Index offset, Eigen::Index n) {
    prog.layout.xi_offset = offset;
    prog.layout.n_xi = n;
    prog.lower.segment(offset, n).setZero();
}

inline Vector start_with(const DesignProblem& p, const NlpProgram& prog) {
    Vector x0 = Vector::Zero(prog.n_vars);
    x0.head(p.n_theta) = p.start();
    return x0;
}

inline Vector start_from_theta(const NlpProgram& prog, const Vector& theta) {
    Vector x = prog.x0;
    x.segment(prog.layout.theta_offset, prog.layout.n_theta) = theta;
    if (prog.complete_start) prog.complete_start(x);
    return x;
}

/// Lowers slack variables to the smallest values their constraints allow at
/// the solution's theta, when that keeps the point feasible and lowers the
/// objective. The solver stops within tolerance of the slack bounds; this
/// removes the remainder exactly.
inline void tighten_slacks(const NlpProgram& prog, NlpSolution& sol, const SolverOptions& options) {
    if (!prog.complete_start || !sol.feasible()) return;
    Vector x = sol.x;
    prog.complete_start(x);
    x = prog.project(x);
    const double f = prog.objective(x), v = prog.max_violation(x);
    if (std::isfinite(f) && f < sol.objective && v <= std::max(options.constraint_tol, sol.max_violation)) {
        sol.x = std::move(x);
        sol.objective = f;
        sol.max_violation = v;
    }
}

inline void finish(NlpProgram& prog, const DesignProblem& p) {
    prog.x0 = start_with(p, prog);
    if (prog.complete_start) prog.complete_start(prog.x0);
}

}  // namespace detail

/// min J + rho sum xi  s.t.  Q(i, k) <= xi_i,  xi >= 0.
inline NlpProgram build_risk_averse_scenario(const DesignProblem& problem, const MultiPointDataset& data,
                                             const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::RiskAverseScenario) throw ConfigError("spec is not risk-averse-scenario");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, spec.gamma_for(problem.n_r)});
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index nr = problem.n_r, nt = problem.n_theta;
    const double rho = spec.rho[0];
    NlpProgram prog = detail::base_program(problem, n);
    prog.description = "risk-averse-scenario";
    detail::add_xi(prog, nt, n);
    prog.objective = [ctx, rho, nt, n](const Vector& x) {
        return ctx->problem.objective(x.head(nt)) + rho * x.segment(nt, n).sum();
    };
    prog.n_constraints = n * nr + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, nt, n, nr](const Vector& x, std::span<double> g) {
        const Vector th = x.head(nt);
        const Eigen::MatrixXd q = scenario_quantiles(ctx->problem, ctx->data, th, ctx->gamma);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < nr; ++k) g[static_cast<std::size_t>(i * nr + k)] = q(i, k) - x[nt + i];
        detail::append_design_constraints(ctx->problem, th, g.subspan(static_cast<std::size_t>(n * nr)));
    };
    prog.complete_start = [ctx, nt, layout = prog.layout](Vector& x) {
        const Vector z = worst_quantiles(ctx->problem, ctx->data, x.head(nt), ctx->gamma);
        for (Eigen::Index i = 0; i < layout.n_xi; ++i) x[layout.xi_offset + i] = std::max(0.0, z[i]);
    };
    detail::finish(prog, problem);
    return prog;
}

/// min J + rho sum xi  s.t.  r_k(theta, delta^(i,j)) <= xi_i for every point.
inline NlpProgram build_worst_case(const DesignProblem& problem, const MultiPointDataset& data,
                                   const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::WorstCase) throw ConfigError("spec is not worst-case");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, Vector::Ones(problem.n_r)});
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index nr = problem.n_r, nt = problem.n_theta;
    const double rho = spec.rho[0];
    const auto total = static_cast<Eigen::Index>(data.total_points()) * nr;
    NlpProgram prog = detail::base_program(problem, n);
    prog.description = "worst-case";
    detail::add_xi(prog, nt, n);
    prog.objective = [ctx, rho, nt, n](const Vector& x) {
        return ctx->problem.objective(x.head(nt)) + rho * x.segment(nt, n).sum();
    };
    prog.n_constraints = total + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, nt, nr, total](const Vector& x, std::span<double> g) {
        const Vector th = x.head(nt);
        std::size_t c = 0;
        for (std::size_t i = 0; i < ctx->data.size(); ++i) {
            const double xi = x[nt + static_cast<Eigen::Index>(i)];
            for (const auto& p : ctx->data.points[i]) {
                ctx->problem.requirements_fn(th, p, g.subspan(c, static_cast<std::size_t>(nr)));
                for (Eigen::Index k = 0; k < nr; ++k) g[c++] -= xi;
            }
        }
        detail::append_design_constraints(ctx->problem, th, g.subspan(static_cast<std::size_t>(total)));
    };
    prog.complete_start = [ctx, nt, layout = prog.layout](Vector& x) {
        const Vector z = worst_quantiles(ctx->problem, ctx->data, x.head(nt), ctx->gamma);
        for (Eigen::Index i = 0; i < layout.n_xi; ++i) x[layout.xi_offset + i] = std::max(0.0, z[i]);
    };
    detail::finish(prog, problem);
    return prog;
}

/// min J + rho^T zeta  s.t.  F^{-1}_{Y_k}(1 - zeta_k) <= 0,  zeta in [0, 1]^{n_r},
/// where Y_k = {Q(i, k)}_i.
inline NlpProgram build_risk_averse_requirement(const DesignProblem& problem, const MultiPointDataset& data,
                                                const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::RiskAverseRequirement) throw ConfigError("spec is not risk-averse-requirement");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, spec.gamma_for(problem.n_r)});
    const Eigen::Index nr = problem.n_r, nt = problem.n_theta;
    const Vector rho = to_vector(spec.rho);
    NlpProgram prog = detail::base_program(problem, nr);
    prog.description = "risk-averse-requirement";
    prog.layout.zeta_offset = nt;
    prog.layout.n_zeta = nr;
    prog.lower.segment(nt, nr).setZero();
    prog.upper.segment(nt, nr).setOnes();
    prog.objective = [ctx, rho, nt, nr](const Vector& x) {
        return ctx->problem.objective(x.head(nt)) + rho.dot(x.segment(nt, nr));
    };
    prog.n_constraints = nr + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, nt, nr](const Vector& x, std::span<double> g) {
        const Vector th = x.head(nt);
        const Eigen::MatrixXd q = scenario_quantiles(ctx->problem, ctx->data, th, ctx->gamma);
        std::vector<double> scratch;
        for (Eigen::Index k = 0; k < nr; ++k) {
            const Vector col = q.col(k);
            const double level = std::clamp(1.0 - x[nt + k], 0.0, 1.0);
            g[static_cast<std::size_t>(k)] = quantile(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), level, scratch);
        }
        detail::append_design_constraints(ctx->problem, th, g.subspan(static_cast<std::size_t>(nr)));
    };
    prog.complete_start = [ctx, nt, nr](Vector& x) {
        const Eigen::MatrixXd q = scenario_quantiles(ctx->problem, ctx->data, x.head(nt), ctx->gamma);
        for (Eigen::Index k = 0; k < nr; ++k) {
            const Vector col = q.col(k);
            const double f0 = cdf(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), 0.0);
            x[nt + k] = std::clamp(1.0 - f0, 0.0, 1.0);
        }
    };
    detail::finish(prog, problem);
    return prog;
}

/// min J  s.t.  F^{-1}_Z(1 - alpha) <= 0,  Z_i = max_k Q(i, k).
inline NlpProgram build_risk_agnostic_scenario(const DesignProblem& problem, const MultiPointDataset& data,
                                               const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::RiskAgnosticScenario) throw ConfigError("spec is not risk-agnostic-scenario");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, spec.gamma_for(problem.n_r)});
    const Eigen::Index nt = problem.n_theta;
    const double level = 1.0 - spec.alpha[0];
    NlpProgram prog = detail::base_program(problem, 0);
    prog.description = "risk-agnostic-scenario";
    prog.objective = [ctx](const Vector& x) { return ctx->problem.objective(x); };
    prog.n_constraints = 1 + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, level, nt](const Vector& x, std::span<double> g) {
        const Vector z = worst_quantiles(ctx->problem, ctx->data, x, ctx->gamma);
        g[0] = quantile(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), level);
        detail::append_design_constraints(ctx->problem, x.head(nt), g.subspan(1));
    };
    detail::finish(prog, problem);
    return prog;
}

/// min J  s.t.  F^{-1}_{Y_k}(1 - alpha_k) <= 0 for each requirement k.
inline NlpProgram build_risk_agnostic_requirement(const DesignProblem& problem, const MultiPointDataset& data,
                                                  const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::RiskAgnosticRequirement)
        throw ConfigError("spec is not risk-agnostic-requirement");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, spec.gamma_for(problem.n_r)});
    const Eigen::Index nr = problem.n_r, nt = problem.n_theta;
    const Vector alpha = to_vector(spec.alpha);
    NlpProgram prog = detail::base_program(problem, 0);
    prog.description = "risk-agnostic-requirement";
    prog.objective = [ctx](const Vector& x) { return ctx->problem.objective(x); };
    prog.n_constraints = nr + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, alpha, nr, nt](const Vector& x, std::span<double> g) {
        const Eigen::MatrixXd q = scenario_quantiles(ctx->problem, ctx->data, x, ctx->gamma);
        std::vector<double> scratch;
        for (Eigen::Index k = 0; k < nr; ++k) {
            const Vector col = q.col(k);
            g[static_cast<std::size_t>(k)] =
                quantile(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), 1.0 - alpha[k], scratch);
        }
        detail::append_design_constraints(ctx->problem, x.head(nt), g.subspan(static_cast<std::size_t>(nr)));
    };
    detail::finish(prog, problem);
    return prog;
}

/// min lambda + rho sum xi  s.t.  Q(i, k) <= xi_i  and  E[h; exp(-kappa xi)] <= lambda.
/// Layout: [theta, lambda, xi].
inline NlpProgram build_moment_risk_averse(const DesignProblem& problem, const MultiPointDataset& data,
                                           const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::MomentRiskAverse) throw ConfigError("spec is not moment-risk-averse");
    if (!problem.has_response()) throw ConfigError("moment programs need a response function");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, spec.gamma_for(problem.n_r)});
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index nr = problem.n_r, nt = problem.n_theta;
    const double rho = spec.rho[0], kappa = spec.kappa;
    NlpProgram prog = detail::base_program(problem, 1 + n);
    prog.description = "moment-risk-averse";
    prog.layout.lambda_offset = nt;
    detail::add_xi(prog, nt + 1, n);
    prog.objective = [rho, nt, n](const Vector& x) { return x[nt] + rho * x.segment(nt + 1, n).sum(); };
    prog.n_constraints = n * nr + 1 + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, nt, n, nr, kappa](const Vector& x, std::span<double> g) {
        const Vector th = x.head(nt);
        const Eigen::MatrixXd q = scenario_quantiles(ctx->problem, ctx->data, th, ctx->gamma);
        std::vector<double> w(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const double xi = x[nt + 1 + i];
            for (Eigen::Index k = 0; k < nr; ++k) g[static_cast<std::size_t>(i * nr + k)] = q(i, k) - xi;
            w[static_cast<std::size_t>(i)] = std::exp(-kappa * xi);
        }
        g[static_cast<std::size_t>(n * nr)] = weighted_mean(ctx->problem, ctx->data, th, w) - x[nt];
        detail::append_design_constraints(ctx->problem, th, g.subspan(static_cast<std::size_t>(n * nr + 1)));
    };
    prog.complete_start = [ctx, nt, n, kappa](Vector& x) {
        const Vector th = x.head(nt);
        const Vector z = worst_quantiles(ctx->problem, ctx->data, th, ctx->gamma);
        std::vector<double> w(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            x[nt + 1 + i] = std::max(0.0, z[i]);
            w[static_cast<std::size_t>(i)] = std::exp(-kappa * x[nt + 1 + i]);
        }
        x[nt] = weighted_mean(ctx->problem, ctx->data, th, w);
    };
    detail::finish(prog, problem);
    return prog;
}

/// E_i = max(mean of V(i) - lambda, Q(i, 1), ..., Q(i, n_r)), where V(i)
/// collects the per-scenario means that do not exceed scenario i's mean.
inline Vector moment_excess(const DesignProblem& problem, const MultiPointDataset& data, const Vector& theta,
                            double lambda, const Vector& gamma) {
    const Vector u = scenario_means(problem, data, theta);
    const Eigen::Index n = u.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return u[a] < u[b]; });
    // prefix means over the sorted order; equal means share the larger group
    Vector v_mean(n);
    double running = 0.0;
    for (Eigen::Index pos = 0; pos < n;) {
        Eigen::Index end = pos;
        double group = 0.0;
        while (end < n && u[order[static_cast<std::size_t>(end)]] == u[order[static_cast<std::size_t>(pos)]])
            group += u[order[static_cast<std::size_t>(end++)]];
        running += group;
        for (Eigen::Index t = pos; t < end; ++t) v_mean[order[static_cast<std::size_t>(t)]] = running / static_cast<double>(end);
        pos = end;
    }
    Vector e = v_mean.array() - lambda;
    if (problem.n_r > 0) e = e.cwiseMax(worst_quantiles(problem, data, theta, gamma));
    return e;
}

/// min lambda  s.t.  F^{-1}_E(1 - alpha) <= 0.  Layout: [theta, lambda].
inline NlpProgram build_moment_risk_agnostic(const DesignProblem& problem, const MultiPointDataset& data,
                                             const FormulationSpec& spec) {
    if (spec.kind != FormulationKind::MomentRiskAgnostic) throw ConfigError("spec is not moment-risk-agnostic");
    if (!problem.has_response()) throw ConfigError("moment programs need a response function");
    require_valid(spec, problem.n_r);
    auto ctx = std::make_shared<detail::BuildContext>(detail::BuildContext{problem, data, spec.gamma_for(problem.n_r)});
    const Eigen::Index nt = problem.n_theta;
    const double level = 1.0 - spec.alpha[0];
    NlpProgram prog = detail::base_program(problem, 1);
    prog.description = "moment-risk-agnostic";
    prog.layout.lambda_offset = nt;
    prog.objective = [nt](const Vector& x) { return x[nt]; };
    prog.n_constraints = 1 + detail::design_constraint_count(problem);
    prog.constraints_fn = [ctx, nt, level](const Vector& x, std::span<double> g) {
        const Vector th = x.head(nt);
        const Vector e = moment_excess(ctx->problem, ctx->data, th, x[nt], ctx->gamma);
        g[0] = quantile(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), level);
        detail::append_design_constraints(ctx->problem, th, g.subspan(1));
    };
    prog.complete_start = [ctx, nt](Vector& x) {
        const Vector th = x.head(nt);
        x[nt] = scenario_means(ctx->problem, ctx->data, th).maxCoeff();
    };
    detail::finish(prog, problem);
    return prog;
}

inline NlpProgram build_program(const DesignProblem& problem, const MultiPointDataset& data,
                                const FormulationSpec& spec) {
    switch (spec.kind) {
        case FormulationKind::RiskAverseScenario: return build_risk_averse_scenario(problem, data, spec);
        case FormulationKind::WorstCase: return build_worst_case(problem, data, spec);
        case FormulationKind::RiskAverseRequirement: return build_risk_averse_requirement(problem, data, spec);
        case FormulationKind::RiskAgnosticScenario: return build_risk_agnostic_scenario(problem, data, spec);
        case FormulationKind::RiskAgnosticRequirement: return build_risk_agnostic_requirement(problem, data, spec);
        case FormulationKind::MomentRiskAverse: return build_moment_risk_averse(problem, data, spec);
        case FormulationKind::MomentRiskAgnostic: return build_moment_risk_agnostic(problem, data, spec);
    }
    throw ConfigError("unknown formulation");
}

/// Solved design plus its outlier classification.
struct DesignResult {
    NlpSolution solution;
    Vector theta;
    double objective = 0.0;  // J(theta*), not the penalized program value
    OutlierReport outliers;
};

/// Builds, solves (multistart plus one extra start at problem.start() and one
/// per entry of `theta_starts`) and classifies outliers. Slack blocks of the
/// extra starts are filled from their theta.
inline DesignResult solve_design(const DesignProblem& problem, const MultiPointDataset& data,
                                 const FormulationSpec& spec, const SolverOptions& options,
                                 std::span<const Vector> theta_starts = {}, double outlier_tolerance = 1e-6) {
    const NlpProgram prog = build_program(problem, data, spec);
    NlpSolution best = multistart(prog, options);
    std::vector<Vector> extra{prog.x0};
    for (const Vector& th : theta_starts) {
        problem.check_theta(th);
        extra.push_back(detail::start_from_theta(prog, th));
    }
    for (const Vector& x0 : extra) {
        try {
            NlpSolution s = solve(prog, x0, options);
            if (better_solution(s, best)) best = std::move(s);
        } catch (const InvalidStart&) {
        }
    }
    detail::tighten_slacks(prog, best, options);
    DesignResult r;
    r.theta = prog.layout.theta(best.x);
    r.objective = problem.objective(r.theta);
    r.outliers = extract_outliers(problem, data, r.theta, spec.gamma_for(problem.n_r), outlier_tolerance);
    r.solution = std::move(best);
    return r;
}

/// Solves two programs that share their optimum, then polishes each from the
/// other's design. Local searches on nonconvex problems can stop in different
/// basins; the cross starts put both programs in the better one.
inline std::pair<DesignResult, DesignResult> solve_polished_pair(const DesignProblem& problem,
                                                                 const MultiPointDataset& data,
                                                                 const FormulationSpec& a, const FormulationSpec& b,
                                                                 const SolverOptions& options, int max_rounds = 5) {
    DesignResult ra = solve_design(problem, data, a, options);
    DesignResult rb = solve_design(problem, data, b, options);
    const NlpProgram pa = build_program(problem, data, a), pb = build_program(problem, data, b);
    auto polish = [&](DesignResult& r, const NlpProgram& prog, const FormulationSpec& spec, const Vector& theta) {
        NlpSolution s;
        try {
            s = solve(prog, detail::start_from_theta(prog, theta), options);
        } catch (const InvalidStart&) {
            return false;
        }
        detail::tighten_slacks(prog, s, options);
        if (!better_solution(s, r.solution)) return false;
        r.theta = prog.layout.theta(s.x);
        r.objective = problem.objective(r.theta);
        r.outliers = extract_outliers(problem, data, r.theta, spec.gamma_for(problem.n_r), 1e-6);
        r.solution = std::move(s);
        return true;
    };
    for (int round = 0; round < max_rounds; ++round) {
        const bool ua = polish(ra, pa, a, rb.theta);
        const bool ub = polish(rb, pb, b, ra.theta);
        if (!ua && !ub) break;
    }
    return {std::move(ra), std::move(rb)};
}

/// Smallest alpha that makes the risk-agnostic scenario program feasible:
/// solve the risk-averse scenario program with J = 0 and a large rho, then
/// return sigma / n of its solution.
inline double max_feasible_alpha(const DesignProblem& problem, const MultiPointDataset& data, const Vector& gamma,
                                 const SolverOptions& options, double rho = 1e3) {
    if (data.size() == 0) throw InvalidInput("empty dataset");
    FormulationSpec spec;
    spec.kind = FormulationKind::RiskAverseScenario;
    spec.rho = {rho};
    spec.gamma = to_std(gamma);
    const DesignResult r = solve_design(with_zero_objective(problem), data, spec, options);
    return static_cast<double>(r.outliers.sigma()) / static_cast<double>(data.size());
}

}  // namespace srd
