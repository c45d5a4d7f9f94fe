#pragma once

// Run configuration: one JSON document per run. Every field has a default;
// loading reports every problem it finds in one ConfigError.

#include "srd/demo.hpp"
#include "srd/formulations.hpp"
#include "srd/nlp.hpp"
#include "srd/problems/enclosure.hpp"
#include "srd/problems/interval_cover.hpp"
#include "srd/problems/wing_surrogate.hpp"
#include "srd/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace srd {

using Json = nlohmann::json;

struct ProblemConfig {
    std::string name = "enclosure";
    EnclosureOptions enclosure;
    double theta_lo = 0.0, theta_hi = 10.0, delta_lo = 0.0, delta_hi = 4.0;  // interval_cover
    std::uint64_t wing_seed = 1;
};

struct ScenarioSource {
    std::string csv;               // takes precedence over the generator when set
    std::string generator;           // ring | uniform-box; empty picks ring for enclosure

    std::size_t count = 15;
    std::uint64_t seed = 1;
    RingMechanism ring;
    std::vector<Scenario> planted;  // prepended to generated scenarios
};

struct PerturbationConfig {
    std::string kind = "ball-volume";
    std::string family = "uniform-in-ball";
    std::string radius_rule = "constant";  // constant | proportional | adversarial
    double radius = 0.0;                    // mu, factor or r_max depending on the rule
    std::size_t m = 1;
    std::uint64_t seed = 1;
};

struct AnalysisConfig {
    std::size_t n_prime = 10000;
    std::size_t m_prime = 200;
    std::vector<double> gammas{0.95};
    double level = 0.95;
    std::uint64_t seed = 1;
    std::string test_csv;
};

struct SequentialConfig {
    std::size_t batch = 17;
    int max_iterations = 10;
    double target = 0.0;
    std::size_t pool = 10000;
    std::uint64_t pool_seed = 2;
    std::string pool_csv;
};

struct RunConfig {
    ProblemConfig problem;
    ScenarioSource scenarios;
    PerturbationConfig perturbation;
    FormulationSpec formulation;
    SolverOptions solver;
    AnalysisConfig analysis;
    SequentialConfig sequential;
    DemoOptions demo;
    std::string output = "out";
    std::filesystem::path base_dir;  // relative paths resolve against this
};

/// The generator named in the configuration, or the problem's default.
inline std::string effective_generator(const RunConfig& c) {
    if (!c.scenarios.generator.empty()) return c.scenarios.generator;
    return c.problem.name == "enclosure" ? "ring" : "uniform-box";
}

// ---------------------------------------------------------------- writing

inline Json scenarios_to_json(const std::vector<Scenario>& v) {
    Json a = Json::array();
    for (const auto& s : v) a.push_back(to_std(s));
    return a;
}

inline Json solver_to_json(const SolverOptions& s) {
    return {{"max_outer", s.max_outer},         {"max_inner", s.max_inner},
            {"constraint_tol", s.constraint_tol}, {"objective_tol", s.objective_tol},
            {"fd_step", s.fd_step},               {"penalty_growth", s.penalty_growth},
            {"initial_penalty", s.initial_penalty}, {"max_penalty", s.max_penalty},
            {"multistart", s.multistart},         {"seed", s.seed}};
}

inline Json to_json(const RunConfig& c) {
    const auto& p = c.problem;
    const auto& d = c.demo;
    return {
        {"problem",
         {{"name", p.name},
          {"enclosure",
           {{"half_width", p.enclosure.half_width},
            {"mc_points", p.enclosure.mc_points},
            {"seed", p.enclosure.seed},
            {"min_radius", p.enclosure.min_radius}}},
          {"interval_cover",
           {{"theta_lo", p.theta_lo}, {"theta_hi", p.theta_hi}, {"delta_lo", p.delta_lo}, {"delta_hi", p.delta_hi}}},
          {"wing_seed", p.wing_seed}}},
        {"scenarios",
         {{"csv", c.scenarios.csv},
          {"generator", c.scenarios.generator},
          {"count", c.scenarios.count},
          {"seed", c.scenarios.seed},
          {"ring",
           {{"base_radius", c.scenarios.ring.base_radius},
            {"spread", c.scenarios.ring.spread},
            {"half_width", c.scenarios.ring.half_width}}},
          {"planted", scenarios_to_json(c.scenarios.planted)}}},
        {"perturbation",
         {{"kind", c.perturbation.kind},
          {"family", c.perturbation.family},
          {"radius_rule", c.perturbation.radius_rule},
          {"radius", c.perturbation.radius},
          {"m", c.perturbation.m},
          {"seed", c.perturbation.seed}}},
        {"formulation",
         {{"kind", to_string(c.formulation.kind)},
          {"rho", c.formulation.rho},
          {"gamma", c.formulation.gamma},
          {"alpha", c.formulation.alpha},
          {"kappa", c.formulation.kappa}}},
        {"solver", solver_to_json(c.solver)},
        {"analysis",
         {{"n_prime", c.analysis.n_prime},
          {"m_prime", c.analysis.m_prime},
          {"gammas", c.analysis.gammas},
          {"level", c.analysis.level},
          {"seed", c.analysis.seed},
          {"test_csv", c.analysis.test_csv}}},
        {"sequential",
         {{"batch", c.sequential.batch},
          {"max_iterations", c.sequential.max_iterations},
          {"target", c.sequential.target},
          {"pool", c.sequential.pool},
          {"pool_seed", c.sequential.pool_seed},
          {"pool_csv", c.sequential.pool_csv}}},
        {"demo",
         {{"ring", {{"base_radius", d.ring.base_radius}, {"spread", d.ring.spread}, {"half_width", d.ring.half_width}}},
          {"mc_points", d.enclosure.mc_points},
          {"small_n", d.small_n},
          {"small_seed", d.small_seed},
          {"planted", scenarios_to_json(d.planted)},
          {"radius_factor", d.radius_factor},
          {"m", d.m},
          {"gamma", d.gamma},
          {"rho_cover", d.rho_cover},
          {"rho_scan", d.rho_scan},
          {"run_large", d.run_large},
          {"large_n", d.large_n},
          {"large_seed", d.large_seed},
          {"large_sigma", d.large_sigma},
          {"large_m", d.large_m},
          {"r_max", d.r_max},
          {"n_prime", d.n_prime},
          {"m_prime", d.m_prime},
          {"analysis_seed", d.analysis_seed},
          {"solver", solver_to_json(d.solver)},
          {"large_multistart", d.large_multistart}}},
        {"output", c.output},
    };
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hash of every setting that can change a result; the output directory is
/// left out so that the same run written elsewhere keeps its hash.
inline std::string config_hash(const RunConfig& c) {
    Json j = to_json(c);
    j.erase("output");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

/// Defaults for every field, with the formulation parameters filled in.
inline RunConfig default_config() {
    RunConfig c;
    c.formulation.kind = FormulationKind::WorstCase;
    c.formulation.rho = {100.0};
    c.solver.multistart = 4;
    c.solver.seed = 3;
    c.scenarios.ring.spread = 0.25;
    return c;
}

// ---------------------------------------------------------------- reading

namespace detail {

// Reads typed fields out of a JSON object, recording every failure instead
// of stopping at the first one.
class FieldReader {
public:
    FieldReader(std::vector<std::string>& errors, std::string path) : errors_(errors), path_(std::move(path)) {}

    template <class T>
    void get(const Json& obj, const char* key, T& out) {
        seen_.insert(key);
        auto it = obj.find(key);
        if (it == obj.end()) return;
        try {
            out = it->template get<T>();
        } catch (const Json::exception&) {
            errors_.push_back(where(key) + ": expected " + type_name<T>() + ", got " + it->dump());
        }
    }

    void unknown_keys(const Json& obj) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!seen_.count(it.key())) errors_.push_back(where(it.key()) + ": unknown key");
    }

    const Json* object(const Json& obj, const char* key) {
        seen_.insert(key);
        auto it = obj.find(key);
        if (it == obj.end()) return nullptr;
        if (!it->is_object()) {
            errors_.push_back(where(key) + ": expected an object");
            return nullptr;
        }
        return &*it;
    }

    void check(bool ok, const char* key, const std::string& message) {
        if (!ok) errors_.push_back(where(key) + ": " + message);
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::vector<std::string>& errors() { return errors_; }

private:
    template <class T>
    static std::string type_name() {
        if constexpr (std::is_same_v<T, std::string>) return "a string";
        else if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else return "an array";
    }

    std::vector<std::string>& errors_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

inline void read_scenario_list(FieldReader& r, const Json& obj, const char* key, std::vector<Scenario>& out) {
    std::vector<std::vector<double>> rows;
    const std::size_t before = r.errors().size();
    r.get(obj, key, rows);
    if (r.errors().size() != before || !obj.contains(key)) return;
    out.clear();
    for (const auto& row : rows) out.push_back(to_vector(row));
}

inline void read_solver(const Json& j, const std::string& path, SolverOptions& s, std::vector<std::string>& errors) {
    FieldReader r(errors, path);
    r.get(j, "max_outer", s.max_outer);
    r.get(j, "max_inner", s.max_inner);
    r.get(j, "constraint_tol", s.constraint_tol);
    r.get(j, "objective_tol", s.objective_tol);
    r.get(j, "fd_step", s.fd_step);
    r.get(j, "penalty_growth", s.penalty_growth);
    r.get(j, "initial_penalty", s.initial_penalty);
    r.get(j, "max_penalty", s.max_penalty);
    r.get(j, "multistart", s.multistart);
    r.get(j, "seed", s.seed);
    r.unknown_keys(j);
    r.check(s.max_outer >= 1, "max_outer", "must be at least 1");
    r.check(s.max_inner >= 1, "max_inner", "must be at least 1");
    r.check(s.constraint_tol > 0, "constraint_tol", "must be positive");
    r.check(s.objective_tol > 0, "objective_tol", "must be positive");
    r.check(s.fd_step > 0 && s.fd_step < 1, "fd_step", "must lie in (0, 1)");
    r.check(s.penalty_growth > 1, "penalty_growth", "must exceed 1");
    r.check(s.initial_penalty > 0, "initial_penalty", "must be positive");
    r.check(s.max_penalty >= s.initial_penalty, "max_penalty", "must be at least initial_penalty");
    r.check(s.multistart >= 1, "multistart", "must be at least 1");
}

inline void read_ring(const Json& j, const std::string& path, RingMechanism& ring, std::vector<std::string>& errors) {
    FieldReader r(errors, path);
    r.get(j, "base_radius", ring.base_radius);
    r.get(j, "spread", ring.spread);
    r.get(j, "half_width", ring.half_width);
    r.unknown_keys(j);
    r.check(ring.base_radius > 0, "base_radius", "must be positive");
    r.check(ring.spread >= 0, "spread", "must be non-negative");
    r.check(ring.half_width > ring.base_radius, "half_width", "must exceed base_radius");
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace detail

/// Parses and validates a configuration. Relative CSV paths resolve against
/// `base_dir`. Throws ConfigError listing every problem found.
inline RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {}) {
    std::vector<std::string> errors;
    RunConfig c = default_config();
    c.base_dir = base_dir;
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    detail::FieldReader top(errors, "");

    if (const Json* p = top.object(j, "problem")) {
        detail::FieldReader r(errors, "problem");
        r.get(*p, "name", c.problem.name);
        r.get(*p, "wing_seed", c.problem.wing_seed);
        if (const Json* e = r.object(*p, "enclosure")) {
            detail::FieldReader re(errors, "problem.enclosure");
            re.get(*e, "half_width", c.problem.enclosure.half_width);
            re.get(*e, "mc_points", c.problem.enclosure.mc_points);
            re.get(*e, "seed", c.problem.enclosure.seed);
            re.get(*e, "min_radius", c.problem.enclosure.min_radius);
            re.unknown_keys(*e);
            re.check(c.problem.enclosure.half_width > 0, "half_width", "must be positive");
            re.check(c.problem.enclosure.mc_points >= 1, "mc_points", "must be at least 1");
            re.check(c.problem.enclosure.min_radius > 0, "min_radius", "must be positive");
        }
        if (const Json* ic = r.object(*p, "interval_cover")) {
            detail::FieldReader ri(errors, "problem.interval_cover");
            ri.get(*ic, "theta_lo", c.problem.theta_lo);
            ri.get(*ic, "theta_hi", c.problem.theta_hi);
            ri.get(*ic, "delta_lo", c.problem.delta_lo);
            ri.get(*ic, "delta_hi", c.problem.delta_hi);
            ri.unknown_keys(*ic);
            ri.check(c.problem.theta_lo < c.problem.theta_hi, "theta_hi", "must exceed theta_lo");
            ri.check(c.problem.delta_lo < c.problem.delta_hi, "delta_hi", "must exceed delta_lo");
        }
        r.unknown_keys(*p);
        r.check(c.problem.name == "enclosure" || c.problem.name == "interval_cover" ||
                    c.problem.name == "wing_surrogate",
                "name", "unknown problem '" + c.problem.name + "' (enclosure, interval_cover, wing_surrogate)");
    }

    if (const Json* s = top.object(j, "scenarios")) {
        detail::FieldReader r(errors, "scenarios");
        r.get(*s, "csv", c.scenarios.csv);
        r.get(*s, "generator", c.scenarios.generator);
        r.get(*s, "count", c.scenarios.count);
        r.get(*s, "seed", c.scenarios.seed);
        if (const Json* ring = r.object(*s, "ring")) detail::read_ring(*ring, "scenarios.ring", c.scenarios.ring, errors);
        detail::read_scenario_list(r, *s, "planted", c.scenarios.planted);
        r.unknown_keys(*s);
        r.check(!c.scenarios.csv.empty() || c.scenarios.count >= 1, "count", "must be at least 1");
        r.check(c.scenarios.planted.size() <= c.scenarios.count, "planted", "more planted scenarios than count");
    }
    if (const std::string g = effective_generator(c); g != "ring" && g != "uniform-box")
        errors.push_back("scenarios.generator: unknown generator '" + g + "' (ring, uniform-box)");
    else if (g == "ring" && c.problem.name != "enclosure")
        errors.push_back("scenarios.generator: the ring generator only applies to the enclosure problem");

    if (const Json* p = top.object(j, "perturbation")) {
        detail::FieldReader r(errors, "perturbation");
        r.get(*p, "kind", c.perturbation.kind);
        r.get(*p, "family", c.perturbation.family);
        r.get(*p, "radius_rule", c.perturbation.radius_rule);
        r.get(*p, "radius", c.perturbation.radius);
        r.get(*p, "m", c.perturbation.m);
        r.get(*p, "seed", c.perturbation.seed);
        r.unknown_keys(*p);
        try {
            parse_perturbation_kind(c.perturbation.kind);
        } catch (const ConfigError& e) {
            errors.push_back(std::string("perturbation.kind: ") + e.what());
        }
        try {
            parse_distribution_family(c.perturbation.family);
        } catch (const ConfigError& e) {
            errors.push_back(std::string("perturbation.family: ") + e.what());
        }
        const auto& rule = c.perturbation.radius_rule;
        r.check(rule == "constant" || rule == "proportional" || rule == "adversarial", "radius_rule",
                "unknown rule '" + rule + "' (constant, proportional, adversarial)");
        r.check(c.perturbation.radius >= 0, "radius", "must be non-negative");
        r.check(rule != "adversarial" || c.perturbation.radius > 0, "radius", "adversarial rule needs r_max > 0");
        r.check(c.perturbation.m >= 1, "m", "must be at least 1");
    }

    if (const Json* f = top.object(j, "formulation")) {
        detail::FieldReader r(errors, "formulation");
        std::string kind = to_string(c.formulation.kind);
        r.get(*f, "kind", kind);
        r.get(*f, "rho", c.formulation.rho);
        r.get(*f, "gamma", c.formulation.gamma);
        r.get(*f, "alpha", c.formulation.alpha);
        r.get(*f, "kappa", c.formulation.kappa);
        r.unknown_keys(*f);
        try {
            c.formulation.kind = parse_formulation_kind(kind);
        } catch (const ConfigError& e) {
            errors.push_back(std::string("formulation.kind: ") + e.what());
        }
    }

    if (const Json* s = top.object(j, "solver")) detail::read_solver(*s, "solver", c.solver, errors);

    if (const Json* a = top.object(j, "analysis")) {
        detail::FieldReader r(errors, "analysis");
        r.get(*a, "n_prime", c.analysis.n_prime);
        r.get(*a, "m_prime", c.analysis.m_prime);
        r.get(*a, "gammas", c.analysis.gammas);
        r.get(*a, "level", c.analysis.level);
        r.get(*a, "seed", c.analysis.seed);
        r.get(*a, "test_csv", c.analysis.test_csv);
        r.unknown_keys(*a);
        r.check(c.analysis.n_prime >= 1, "n_prime", "must be at least 1");
        r.check(c.analysis.m_prime >= 1, "m_prime", "must be at least 1");
        r.check(!c.analysis.gammas.empty(), "gammas", "needs at least one value");
        for (double g : c.analysis.gammas) r.check(g > 0 && g <= 1, "gammas", "values must lie in (0, 1]");
        r.check(c.analysis.level > 0 && c.analysis.level < 1, "level", "must lie in (0, 1)");
    }

    if (const Json* s = top.object(j, "sequential")) {
        detail::FieldReader r(errors, "sequential");
        r.get(*s, "batch", c.sequential.batch);
        r.get(*s, "max_iterations", c.sequential.max_iterations);
        r.get(*s, "target", c.sequential.target);
        r.get(*s, "pool", c.sequential.pool);
        r.get(*s, "pool_seed", c.sequential.pool_seed);
        r.get(*s, "pool_csv", c.sequential.pool_csv);
        r.unknown_keys(*s);
        r.check(c.sequential.batch >= 1, "batch", "must be at least 1");
        r.check(c.sequential.max_iterations >= 1, "max_iterations", "must be at least 1");
        r.check(c.sequential.target >= 0 && c.sequential.target < 1, "target", "must lie in [0, 1)");
        r.check(!c.sequential.pool_csv.empty() || c.sequential.pool >= 1, "pool", "must be at least 1");
    }

    if (const Json* d = top.object(j, "demo")) {
        detail::FieldReader r(errors, "demo");
        auto& o = c.demo;
        if (const Json* ring = r.object(*d, "ring")) detail::read_ring(*ring, "demo.ring", o.ring, errors);
        r.get(*d, "mc_points", o.enclosure.mc_points);
        r.get(*d, "small_n", o.small_n);
        r.get(*d, "small_seed", o.small_seed);
        detail::read_scenario_list(r, *d, "planted", o.planted);
        r.get(*d, "radius_factor", o.radius_factor);
        r.get(*d, "m", o.m);
        r.get(*d, "gamma", o.gamma);
        r.get(*d, "rho_cover", o.rho_cover);
        r.get(*d, "rho_scan", o.rho_scan);
        r.get(*d, "run_large", o.run_large);
        r.get(*d, "large_n", o.large_n);
        r.get(*d, "large_seed", o.large_seed);
        r.get(*d, "large_sigma", o.large_sigma);
        r.get(*d, "large_m", o.large_m);
        r.get(*d, "r_max", o.r_max);
        r.get(*d, "n_prime", o.n_prime);
        r.get(*d, "m_prime", o.m_prime);
        r.get(*d, "analysis_seed", o.analysis_seed);
        if (const Json* s = r.object(*d, "solver")) detail::read_solver(*s, "demo.solver", o.solver, errors);
        r.get(*d, "large_multistart", o.large_multistart);
        r.unknown_keys(*d);
        r.check(o.enclosure.mc_points >= 1, "mc_points", "must be at least 1");
        r.check(o.small_n >= 3 && o.planted.size() <= o.small_n, "small_n", "must be at least 3 and cover the planted scenarios");
        for (const auto& s : o.planted) r.check(s.size() == 2, "planted", "scenarios must have 2 components");
        r.check(o.radius_factor > 0, "radius_factor", "must be positive");
        r.check(o.m >= 2, "m", "must be at least 2");
        r.check(o.gamma > 0 && o.gamma <= 1, "gamma", "must lie in (0, 1]");
        r.check(o.rho_cover > 0, "rho_cover", "must be positive");
        r.check(!o.rho_scan.empty(), "rho_scan", "needs at least one value");
        for (std::size_t k = 1; k < o.rho_scan.size(); ++k)
            r.check(o.rho_scan[k] < o.rho_scan[k - 1] && o.rho_scan[k] > 0, "rho_scan", "must be positive and decreasing");
        r.check(o.large_n >= 2 && o.large_sigma < o.large_n, "large_sigma", "must be below large_n");
        r.check(o.large_m >= 2, "large_m", "must be at least 2");
        r.check(o.r_max > 0, "r_max", "must be positive");
        r.check(o.n_prime >= 1 && o.m_prime >= 1, "n_prime", "n_prime and m_prime must be at least 1");
        r.check(o.large_multistart >= 1, "large_multistart", "must be at least 1");
    }

    top.get(j, "output", c.output);
    top.unknown_keys(j);
    top.check(!c.output.empty(), "output", "must not be empty");

    c.scenarios.csv = detail::resolve(base_dir, c.scenarios.csv);
    c.analysis.test_csv = detail::resolve(base_dir, c.analysis.test_csv);
    c.sequential.pool_csv = detail::resolve(base_dir, c.sequential.pool_csv);
    for (const std::string* path : {&c.scenarios.csv, &c.analysis.test_csv, &c.sequential.pool_csv})
        if (!path->empty() && !std::filesystem::is_regular_file(*path))
            errors.push_back("file not found: " + *path);

    // formulation parameters depend on the requirement count of the problem
    const Eigen::Index n_r = c.problem.name == "interval_cover" ? 1 : 2;
    for (const auto& e : validate(c.formulation, n_r)) errors.push_back("formulation: " + e);

    if (!errors.empty()) {
        std::ostringstream msg;
        msg << errors.size() << " configuration error" << (errors.size() > 1 ? "s" : "") << ":";
        for (const auto& e : errors) msg << "\n  " << e;
        throw ConfigError(msg.str());
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration '" + path + "'");
    Json j;
    try {
        j = Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------- building

inline DesignProblem make_problem(const RunConfig& c) {
    if (c.problem.name == "enclosure") return enclosure_problem(c.problem.enclosure);
    if (c.problem.name == "interval_cover")
        return interval_cover_problem(c.problem.theta_lo, c.problem.theta_hi, c.problem.delta_lo, c.problem.delta_hi);
    if (c.problem.name == "wing_surrogate") return wing_surrogate_problem(c.problem.wing_seed).problem;
    throw ConfigError("unknown problem '" + c.problem.name + "'");
}

/// `count` scenarios from the configured generator; sub-stream `stream`
/// separates training, test and pool draws made from one seed.
inline std::vector<Scenario> generate_scenarios(const RunConfig& c, const DesignProblem& problem, std::size_t count,
                                                std::uint64_t seed, std::uint64_t stream, bool with_planted) {
    std::vector<Scenario> out;
    if (with_planted) out = c.scenarios.planted;
    for (const auto& s : out)
        if (s.size() != problem.n_delta) throw ConfigError("planted scenario dimension does not match the problem");
    SeededSampler rng(seed, stream);
    const std::size_t need = count > out.size() ? count - out.size() : 0;
    if (effective_generator(c) == "ring") {
        if (problem.n_delta != 2) throw ConfigError("the ring generator needs a 2-dimensional parameter");
        auto drawn = c.scenarios.ring.sample(need, rng);
        out.insert(out.end(), drawn.begin(), drawn.end());
    } else {
        for (std::size_t i = 0; i < need; ++i) out.push_back(rng.uniform_in_box(problem.delta_lower, problem.delta_upper));
    }
    return out;
}

inline std::vector<Scenario> training_scenarios(const RunConfig& c, const DesignProblem& problem) {
    if (!c.scenarios.csv.empty()) return load_csv(c.scenarios.csv, problem.n_delta);
    return generate_scenarios(c, problem, c.scenarios.count, c.scenarios.seed, 0xda7a, true);
}

inline std::vector<Scenario> test_scenarios(const RunConfig& c, const DesignProblem& problem) {
    if (!c.analysis.test_csv.empty()) return load_csv(c.analysis.test_csv, problem.n_delta);
    return generate_scenarios(c, problem, c.analysis.n_prime, c.analysis.seed, 0x7e57da7a, false);
}

inline std::vector<Scenario> pool_scenarios(const RunConfig& c, const DesignProblem& problem) {
    if (!c.sequential.pool_csv.empty()) return load_csv(c.sequential.pool_csv, problem.n_delta);
    return generate_scenarios(c, problem, c.sequential.pool, c.sequential.pool_seed, 0x9001, false);
}

/// Perturbation model; the adversarial rule is evaluated at `theta`.
inline PerturbationModel make_perturbation(const RunConfig& c, const DesignProblem& problem, const Vector* theta) {
    PerturbationModel m;
    m.kind = parse_perturbation_kind(c.perturbation.kind);
    m.family = parse_distribution_family(c.perturbation.family);
    const auto& rule = c.perturbation.radius_rule;
    if (rule == "constant") m.radius = RadiusRule::constant(c.perturbation.radius);
    else if (rule == "proportional") m.radius = RadiusRule::proportional(c.perturbation.radius);
    else {
        if (!theta) throw ConfigError("the adversarial radius rule needs a reference design");
        m.radius = adversarial_rule(problem, *theta, c.perturbation.radius);
    }
    return m;
}

}  // namespace srd
