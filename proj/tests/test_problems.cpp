#include "srd/problems/enclosure.hpp"
#include "srd/problems/interval_cover.hpp"
#include "srd/problems/wing_surrogate.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace srd;

namespace {

Vector v2(double a, double b) {
    Vector s(2);
    s << a, b;
    return s;
}

EnclosureDesign ring(double u1, double u2) {
    EnclosureDesign d;
    d.u1 = u1;
    d.u2 = u2;
    return d;
}

}  // namespace

TEST(Enclosure, RequirementValues) {
    auto d = ring(2.0, 1.0);
    EXPECT_DOUBLE_EQ(enclosure_requirements(d, v2(3, 0)).first, 1.0);
    EXPECT_DOUBLE_EQ(enclosure_requirements(d, v2(2, 0)).first, 0.0);
    EXPECT_DOUBLE_EQ(enclosure_requirements(d, v2(0, 0)).second, 1.0);
}

TEST(Enclosure, PackRoundTrip) {
    EnclosureDesign d;
    d.c1 = {1, 2};
    d.u1 = 3;
    d.c2 = {0.5, 1.5};
    d.u2 = 0.25;
    auto e = EnclosureDesign::unpack(d.pack());
    EXPECT_EQ(e.pack(), d.pack());
    EXPECT_TRUE(d.valid());
    EXPECT_THROW(EnclosureDesign::unpack(Vector::Zero(4)), InvalidInput);
}

TEST(Enclosure, SuccessDomainIsTheAnnulus) {
    auto p = enclosure_problem({.mc_points = 100});
    SeededSampler rng(31);
    for (int t = 0; t < 1000; ++t) {
        EnclosureDesign d;
        d.c1 = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
        d.u1 = rng.uniform(0.5, 4);
        d.c2 = d.c1 + d.u1 * rng.uniform() * Eigen::Vector2d(std::cos(t), std::sin(t));
        d.u2 = rng.uniform(0.1, 2);
        const Vector x = v2(rng.uniform(-6, 6), rng.uniform(-6, 6));
        const double dx1 = x[0] - d.c1.x(), dy1 = x[1] - d.c1.y();
        const double dx2 = x[0] - d.c2.x(), dy2 = x[1] - d.c2.y();
        const bool geometric = dx1 * dx1 + dy1 * dy1 <= d.u1 * d.u1 && dx2 * dx2 + dy2 * dy2 >= d.u2 * d.u2;
        EXPECT_EQ(p.succeeds(d.pack(), x), geometric);
    }
}

TEST(Enclosure, VolumeOfAnnulus) {
    SeededSampler rng(2);
    const double v = enclosure_volume(ring(2, 1).pack(), Vector::Constant(2, -3), Vector::Constant(2, 3), 20000, rng);
    EXPECT_NEAR(v, std::numbers::pi * 3.0, 0.3);
}

TEST(Enclosure, VolumeLimits) {
    SeededSampler rng(2);
    const Vector lo = Vector::Constant(2, -3), hi = Vector::Constant(2, 3);
    EXPECT_LT(enclosure_volume(ring(2, 2 - 1e-6).pack(), lo, hi, 20000, rng), 1e-2);
    EnclosureDesign big = ring(20, 0.1);
    big.c2 = {9, 9};
    EXPECT_DOUBLE_EQ(enclosure_volume(big.pack(), lo, hi, 20000, rng), 36.0);
    EXPECT_THROW(enclosure_volume(big.pack(), lo, hi, 0, rng), InvalidInput);
}

TEST(Enclosure, ProblemObjectiveMatchesAnnulusOracle) {
    auto p = enclosure_problem();
    const double oracle_area = oracle::annulus_area_in_box(1.0, 2.5, 8.0);
    EXPECT_NEAR(p.objective(ring(2.5, 1.0).pack()), oracle_area, 0.05 * oracle_area);
    EXPECT_EQ(p.delta_box_volume(), 256.0);
}

TEST(Enclosure, StandardErrorShrinksWithSampleSize) {
    const Vector lo = Vector::Constant(2, -3), hi = Vector::Constant(2, 3);
    const Vector th = ring(2, 1).pack();
    auto variance = [&](std::size_t n_u) {
        double s = 0, sq = 0;
        const int reps = 300;
        for (int r = 0; r < reps; ++r) {
            SeededSampler rng(1000 + static_cast<std::uint64_t>(r), n_u);
            const double v = enclosure_volume(th, lo, hi, n_u, rng);
            s += v;
            sq += v * v;
        }
        return (sq - s * s / reps) / (reps - 1);
    };
    const double ratio = variance(1000) / variance(2000);
    EXPECT_GT(ratio, 1.4);
    EXPECT_LT(ratio, 2.9);
}

TEST(Enclosure, DesignConstraint) {
    auto p = enclosure_problem({.mc_points = 10});
    EnclosureDesign d = ring(1, 0.5);
    d.c2 = {2, 0};
    Vector g(1);
    p.design_constraints(d.pack(), std::span<double>(g.data(), 1));
    EXPECT_DOUBLE_EQ(g[0], 1.0);
}

TEST(Enclosure, InitialGuessEnclosesData) {
    SeededSampler rng(3);
    auto data = RingMechanism{}.sample(30, rng);
    auto p = enclosure_problem({.mc_points = 10});
    const Vector th = enclosure_initial_guess(data);
    for (const auto& s : data) EXPECT_LE(p.requirements(th, s)[0], 0.0);
    Vector g(1);
    p.design_constraints(th, std::span<double>(g.data(), 1));
    EXPECT_LE(g[0], 0.0);
}

TEST(RingMechanism, DeterministicAndInsideBox) {
    SeededSampler a(5), b(5);
    auto x = RingMechanism{}.sample(200, a), y = RingMechanism{}.sample(200, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i], y[i]);
        EXPECT_LT(x[i].lpNorm<Eigen::Infinity>(), 8.0);
        EXPECT_GT(x[i].norm(), 0.3);
    }
}

TEST(IntervalCover, FeasibleSetIsThetaAboveDelta) {
    auto p = interval_cover_problem();
    EXPECT_EQ(p.n_theta, 1);
    EXPECT_EQ(p.n_r, 1);
    for (double th = 0; th <= 10; th += 0.25)
        for (double d = 0; d <= 4; d += 0.25)
            EXPECT_EQ(p.succeeds(Vector::Constant(1, th), Vector::Constant(1, d)), th >= d);
    EXPECT_THROW(interval_cover_problem(1, 0), ConfigError);
}

TEST(WingSurrogate, DimensionsAndLabel) {
    auto w = wing_surrogate_problem(1);
    EXPECT_EQ(w.problem.n_theta, 9);
    EXPECT_EQ(w.problem.n_delta, 6);
    EXPECT_EQ(w.problem.n_r, 2);
    EXPECT_TRUE(w.problem.synthetic);
    EXPECT_TRUE(w.problem.has_response());
    EXPECT_TRUE(w.probe_feasible);
    EXPECT_TRUE(w.problem.succeeds(w.probe_theta, w.probe_delta));
}

TEST(WingSurrogate, DeterministicPerSeed) {
    auto a = wing_surrogate_problem(7), b = wing_surrogate_problem(7), c = wing_surrogate_problem(8);
    SeededSampler rng(1);
    bool differs = false;
    for (int t = 0; t < 50; ++t) {
        const Vector th = rng.uniform_in_box(a.problem.theta_lower, a.problem.theta_upper);
        const Vector d = rng.uniform_in_box(a.problem.delta_lower, a.problem.delta_upper);
        EXPECT_EQ(a.problem.requirements(th, d), b.problem.requirements(th, d));
        EXPECT_EQ(a.problem.objective(th), b.problem.objective(th));
        differs |= a.problem.requirements(th, d) != c.problem.requirements(th, d);
    }
    EXPECT_TRUE(differs);
}

TEST(WingSurrogate, SmoothInTheta) {
    auto w = wing_surrogate_problem(1);
    SeededSampler rng(6);
    for (int t = 0; t < 20; ++t) {
        const Vector th = rng.uniform_in_box(w.problem.theta_lower, w.problem.theta_upper);
        const Vector d = rng.uniform_in_box(w.problem.delta_lower, w.problem.delta_upper);
        for (int j = 0; j < 9; ++j) {
            // second differences of a C2 function scale with h^2
            auto second = [&](double h) {
                Vector e = Vector::Zero(9);
                e[j] = h;
                return Vector(w.problem.requirements(th + e, d) - 2 * w.problem.requirements(th, d) +
                              w.problem.requirements(th - e, d));
            };
            const Vector a = second(1e-3), b = second(5e-4);
            for (int k = 0; k < 2; ++k)
                if (std::abs(a[k]) > 1e-8) {
                    EXPECT_NEAR(a[k] / b[k], 4.0, 0.2);
                }
        }
    }
}

TEST(WingSurrogate, ThickerPanelsAreSaferAndHeavier) {
    auto w = wing_surrogate_problem(1);
    Vector thin = w.problem.initial_guess, thick = w.problem.initial_guess;
    thin.tail(5).setConstant(0.5);
    thick.tail(5).setConstant(1.7);
    const Vector d = w.problem.delta_upper;
    EXPECT_GT(w.problem.max_requirement(thin, d), 0.0);
    EXPECT_LE(w.problem.max_requirement(thick, d), 0.0);
    EXPECT_GT(w.problem.objective(thick), w.problem.objective(thin));
}
