#pragma once

// Scenario datasets and their perturbation models.
//
// A nominal scenario is a point of the uncertain-parameter space. A perturbed
// scenario replaces it by a ball (surface or volume) or a distribution
// supported on a ball whose radius is set per scenario by a radius rule. The
// multi-point dataset stores m(i) >= 1 points drawn from each perturbed
// scenario; it is the training input of every formulation.

#include "srd/common.hpp"
#include "srd/problem.hpp"
#include "srd/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace srd {

using Scenario = Vector;

/// Maps a nominal scenario to its perturbation radius mu >= 0.
struct RadiusRule {
    std::string description;
    std::function<double(const Scenario&)> radius;

    double operator()(const Scenario& s) const { return radius(s); }

    static RadiusRule constant(double mu) {
        if (!(mu >= 0.0)) throw ConfigError("constant radius must be non-negative");
        return {"constant(" + std::to_string(mu) + ")", [mu](const Scenario&) { return mu; }};
    }

    /// mu = factor * ||delta||, the distance from the scenario to the origin.
    static RadiusRule proportional(double factor) {
        if (!(factor >= 0.0)) throw ConfigError("radius factor must be non-negative");
        return {"proportional(" + std::to_string(factor) + ")",
                [factor](const Scenario& s) { return factor * s.norm(); }};
    }
};

enum class PerturbationKind { BallSurface, BallVolume, Distribution };
enum class DistributionFamily { UniformInBall, TruncatedGaussian };

inline std::string to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::BallSurface: return "ball-surface";
        case PerturbationKind::BallVolume: return "ball-volume";
        case PerturbationKind::Distribution: return "distribution";
    }
    return "unknown";
}

inline PerturbationKind parse_perturbation_kind(std::string_view s) {
    if (s == "ball-surface") return PerturbationKind::BallSurface;
    if (s == "ball-volume") return PerturbationKind::BallVolume;
    if (s == "distribution") return PerturbationKind::Distribution;
    throw ConfigError("unknown perturbation kind '" + std::string(s) + "'");
}

inline DistributionFamily parse_distribution_family(std::string_view s) {
    if (s == "uniform-in-ball") return DistributionFamily::UniformInBall;
    if (s == "gaussian-truncated-to-ball") return DistributionFamily::TruncatedGaussian;
    throw ConfigError("unknown distribution family '" + std::string(s) + "'");
}

/// Euclidean-norm perturbation model.
struct PerturbationModel {
    PerturbationKind kind = PerturbationKind::BallVolume;
    RadiusRule radius = RadiusRule::constant(0.0);
    DistributionFamily family = DistributionFamily::UniformInBall;

    /// Draws one point of the perturbed scenario centered at `center`.
    Vector draw(const Scenario& center, double mu, SeededSampler& rng) const {
        const auto dim = center.size();
        if (mu == 0.0) return center;
        switch (kind) {
            case PerturbationKind::BallSurface:
                return center + mu * rng.unit_direction(dim);
            case PerturbationKind::BallVolume:
                return center + uniform_in_ball(dim, mu, rng);
            case PerturbationKind::Distribution:
                if (family == DistributionFamily::UniformInBall)
                    return center + uniform_in_ball(dim, mu, rng);
                return center + truncated_gaussian(dim, mu, rng);
        }
        throw ConfigError("unknown perturbation kind");
    }

    static Vector uniform_in_ball(Eigen::Index dim, double mu, SeededSampler& rng) {
        Vector d = rng.unit_direction(dim);
        return d * (mu * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)));
    }

    // isotropic gaussian with standard deviation mu/2, rejected outside the ball
    static Vector truncated_gaussian(Eigen::Index dim, double mu, SeededSampler& rng) {
        Vector d(dim);
        for (;;) {
            for (Eigen::Index k = 0; k < dim; ++k) d[k] = 0.5 * mu * rng.normal();
            if (d.norm() <= mu) return d;
        }
    }
};

/// Nominal scenarios together with the points drawn from each perturbed scenario.
struct MultiPointDataset {
    std::vector<Scenario> scenarios;
    std::vector<std::vector<Vector>> points;  // points[i] has m(i) >= 1 entries
    std::vector<double> radii;                // mu^(i) used for scenario i
    std::string provenance;
    std::uint64_t seed = 0;
    bool iid = true;  // false once the set has been augmented by selection

    std::size_t size() const { return scenarios.size(); }
    std::size_t m(std::size_t i) const { return points[i].size(); }
    std::size_t total_points() const {
        std::size_t t = 0;
        for (const auto& p : points) t += p.size();
        return t;
    }

    /// Appends `s` as its own single point.
    void append_nominal(const Scenario& s) {
        scenarios.push_back(s);
        points.push_back({s});
        radii.push_back(0.0);
    }
};

/// Dataset in which every scenario is represented by itself (m = 1).
inline MultiPointDataset nominal_dataset(const std::vector<Scenario>& scenarios) {
    MultiPointDataset d;
    d.provenance = "nominal";
    for (const auto& s : scenarios) d.append_nominal(s);
    return d;
}

/// Draws m points from each perturbed scenario.
///
/// Ball-surface points in two dimensions are m equally spaced angles on the
/// circle and in one dimension alternate between the two endpoints; in higher
/// dimensions their directions are random. Scenario i draws from sub-stream i
/// of `sampler`, so the result does not depend on evaluation order.
inline MultiPointDataset expand(const std::vector<Scenario>& scenarios, const PerturbationModel& model,
                                std::size_t m, const SeededSampler& sampler) {
    if (m < 1) throw ConfigError("m must be at least 1");
    MultiPointDataset d;
    d.scenarios = scenarios;
    d.points.resize(scenarios.size());
    d.radii.resize(scenarios.size());
    d.seed = sampler.seed();
    d.provenance = to_string(model.kind) + " " + model.radius.description + " m=" + std::to_string(m) +
                   " seed=" + std::to_string(sampler.seed());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const Scenario& c = scenarios[i];
        const double mu = model.radius(c);
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidInput("radius rule returned an invalid radius");
        d.radii[i] = mu;
        auto& pts = d.points[i];
        pts.reserve(m);
        SeededSampler rng = sampler.substream(i);
        const auto dim = c.size();
        for (std::size_t j = 0; j < m; ++j) {
            if (model.kind == PerturbationKind::BallSurface && mu > 0.0 && dim <= 2) {
                Vector p = c;
                if (dim == 1) {
                    p[0] += (j % 2 == 0) ? mu : -mu;
                } else {
                    const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
                    p[0] += mu * std::cos(a);
                    p[1] += mu * std::sin(a);
                }
                pts.push_back(std::move(p));
            } else {
                pts.push_back(model.draw(c, mu, rng));
            }
        }
    }
    return d;
}

/// r_max * exp(-(max_k r_k(theta, delta))^2): strongest near the failure boundary.
inline double adversarial_radius(const Scenario& delta, const Vector& theta, const DesignProblem& problem,
                                 double r_max) {
    if (!(r_max > 0.0)) throw ConfigError("r_max must be positive");
    const double worst = problem.max_requirement(theta, delta);
    return r_max * std::exp(-worst * worst);
}

/// Radius rule that evaluates adversarial_radius at a fixed design.
inline RadiusRule adversarial_rule(const DesignProblem& problem, const Vector& theta, double r_max) {
    if (!(r_max > 0.0)) throw ConfigError("r_max must be positive");
    return {"adversarial(r_max=" + std::to_string(r_max) + ")",
            [problem, theta, r_max](const Scenario& s) { return adversarial_radius(s, theta, problem, r_max); }};
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses scenarios from CSV text: a header row naming n_delta columns, then
/// one scenario per row. Blank lines and lines starting with '#' are skipped.
inline std::vector<Scenario> parse_csv(std::istream& in, Eigen::Index n_delta) {
    std::vector<Scenario> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (line_no == 1 && sv.size() >= 3 && sv.substr(0, 3) == "\xEF\xBB\xBF") sv.remove_prefix(3);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = detail::split_commas(sv);
        if (!header_seen) {
            header_seen = true;
            if (static_cast<Eigen::Index>(fields.size()) != n_delta)
                throw ParseError("header names " + std::to_string(fields.size()) + " columns, expected " +
                                     std::to_string(n_delta),
                                 line_no);
            continue;
        }
        if (static_cast<Eigen::Index>(fields.size()) != n_delta)
            throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(n_delta),
                             line_no);
        Scenario s(n_delta);
        for (Eigen::Index k = 0; k < n_delta; ++k) {
            if (!detail::parse_double(fields[static_cast<std::size_t>(k)], s[k]))
                throw ParseError("cannot parse '" + std::string(fields[static_cast<std::size_t>(k)]) + "' as a real",
                                 line_no);
        }
        out.push_back(std::move(s));
    }
    if (!header_seen) throw ParseError("missing header row", 1);
    return out;
}

inline std::vector<Scenario> load_csv(const std::string& path, Eigen::Index n_delta) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    return parse_csv(in, n_delta);
}

inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline void write_scenarios_csv(std::ostream& out, const std::vector<Scenario>& scenarios,
                                const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
    out << '\n';
    for (const auto& s : scenarios) {
        for (Eigen::Index k = 0; k < s.size(); ++k) out << (k ? "," : "") << format_real(s[k]);
        out << '\n';
    }
}

}  // namespace srd
