#include "srd/analysis.hpp"
#include "srd/problems/interval_cover.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace srd;

namespace {

std::vector<Scenario> uniform_scenarios(std::size_t n, double lo, double hi, SeededSampler rng) {
    std::vector<Scenario> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(Scenario::Constant(1, rng.uniform(lo, hi)));
    return s;
}

}  // namespace

TEST(BinomialCi, EdgeCases) {
    auto [lo0, hi0] = binomial_ci(0, 100, 0.95);
    EXPECT_EQ(lo0, 0.0);
    EXPECT_GT(hi0, 0.0);
    auto [lo1, hi1] = binomial_ci(100, 100, 0.95);
    EXPECT_EQ(hi1, 1.0);
    EXPECT_LT(lo1, 1.0);
    EXPECT_THROW(binomial_ci(3, 2), InvalidInput);
    EXPECT_THROW(binomial_ci(0, 0), InvalidInput);
    EXPECT_THROW(binomial_ci(1, 2, 1.0), InvalidInput);
}

TEST(BinomialCi, MatchesTailInversionOracle) {
    auto [lo, hi] = binomial_ci(20, 100, 0.95);
    EXPECT_NEAR(lo, 0.127, 1e-3);
    EXPECT_NEAR(hi, 0.292, 1e-3);
    for (int n : {1, 7, 50, 400})
        for (int x = 0; x <= n; x += std::max(1, n / 7))
            for (double level : {0.9, 0.95, 0.99}) {
                auto [a, b] = binomial_ci(static_cast<std::size_t>(x), static_cast<std::size_t>(n), level);
                auto [oa, ob] = oracle::clopper_pearson(x, n, level);
                EXPECT_NEAR(a, oa, 1e-9);
                EXPECT_NEAR(b, ob, 1e-9);
                EXPECT_LE(a, static_cast<double>(x) / n);
                EXPECT_GE(b, static_cast<double>(x) / n);
            }
}

TEST(TolerantCeil, IgnoresRoundingNoise) {
    EXPECT_EQ(tolerant_ceil(200 * (1 - 0.95)), 10u);
    EXPECT_EQ(tolerant_ceil(0.0), 0u);
    EXPECT_EQ(tolerant_ceil(10.2), 11u);
    EXPECT_EQ(tolerant_ceil(9.9), 10u);
}

TEST(Reliability, AnalyticProbability) {
    auto p = interval_cover_problem();
    auto s = uniform_scenarios(10000, 0, 4, SeededSampler(1));
    auto e = reliability(p, Vector::Constant(1, 3.0), s);
    EXPECT_TRUE(e.covers(0.25));
    EXPECT_NEAR(e.p, 0.25, 0.02);
    auto none = reliability(p, Vector::Constant(1, 4.5), s);
    EXPECT_EQ(none.p, 0.0);
    EXPECT_EQ(none.lo, 0.0);
    auto one = reliability(p, Vector::Constant(1, 3.0), {Scenario::Constant(1, 3.5)});
    EXPECT_EQ(one.p, 1.0);
    EXPECT_THROW(reliability(p, Vector::Constant(2, 3.0), s), InvalidInput);
}

TEST(Robustness, AnalyticProbability) {
    auto p = interval_cover_problem();
    auto s = uniform_scenarios(10000, 0, 4, SeededSampler(2));
    PerturbationModel model{PerturbationKind::Distribution, RadiusRule::constant(0.5), DistributionFamily::UniformInBall};
    auto e = robustness(p, Vector::Constant(1, 3.0), s, model, 1000, 0.95, SeededSampler(3));
    EXPECT_NEAR(e.p, 0.3625, 0.015);
}

TEST(Robustness, ZeroRadiusFullProbabilityIsReliability) {
    auto p = interval_cover_problem();
    auto s = uniform_scenarios(3000, 0, 4, SeededSampler(4));
    PerturbationModel model{PerturbationKind::BallVolume, RadiusRule::constant(0.0)};
    const Vector th = Vector::Constant(1, 2.7);
    auto r = reliability(p, th, s);
    auto q = robustness(p, th, s, model, 5, 1.0, SeededSampler(5));
    EXPECT_EQ(r.failures, q.failures);
    EXPECT_EQ(r.p, q.p);
}

TEST(Robustness, FullProbabilityFailsOnAnySinglePoint) {
    std::vector<std::size_t> counts{0, 1, 3};
    EXPECT_EQ(robustness_from_counts(counts, 10, 1.0).failures, 2u);
    EXPECT_EQ(robustness_from_counts(counts, 10, 0.8).failures, 1u);  // more than 2 of 10
    EXPECT_THROW(robustness_from_counts(counts, 10, 0.0), InvalidInput);
}

TEST(Robustness, MonotoneInGamma) {
    auto p = interval_cover_problem();
    auto s = uniform_scenarios(2000, 0, 4, SeededSampler(6));
    PerturbationModel model{PerturbationKind::BallVolume, RadiusRule::constant(0.4)};
    auto counts = perturbed_failure_counts(p, Vector::Constant(1, 3.0), s, model, 100, SeededSampler(7));
    double prev = -1;
    for (double g : {0.5, 0.7, 0.9, 0.95, 0.99, 1.0}) {
        const double v = robustness_from_counts(counts, 100, g).p;
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Robustness, Reproducible) {
    auto p = interval_cover_problem();
    auto s = uniform_scenarios(500, 0, 4, SeededSampler(6));
    PerturbationModel model{PerturbationKind::BallVolume, RadiusRule::constant(0.4)};
    const Vector th = Vector::Constant(1, 3.0);
    EXPECT_EQ(perturbed_failure_counts(p, th, s, model, 50, SeededSampler(9)),
              perturbed_failure_counts(p, th, s, model, 50, SeededSampler(9)));
}

TEST(Loss, Values) {
    EXPECT_DOUBLE_EQ(loss_measure(std::vector<double>{-1, 0.5, 1.5}), 1.0);
    EXPECT_EQ(loss_measure(std::vector<double>{-1, -2, 0}), 0.0);
    EXPECT_DOUBLE_EQ(loss_measure(std::vector<double>{0.2}), 0.2);
    auto p = interval_cover_problem();
    std::vector<Scenario> s{Scenario::Constant(1, 1), Scenario::Constant(1, 3.5), Scenario::Constant(1, 4.5)};
    EXPECT_DOUBLE_EQ(loss_measures(p, Vector::Constant(1, 3.0), s)[0], 1.0);
    EXPECT_EQ(loss_measures(p, Vector::Constant(1, 5.0), s)[0], 0.0);
}

TEST(Analyze, ReportFields) {
    auto p = interval_cover_problem();
    auto s = uniform_scenarios(4000, 0, 4, SeededSampler(8));
    PerturbationModel model{PerturbationKind::BallVolume, RadiusRule::constant(0.0)};
    AnalysisOptions o;
    o.m_prime = 10;
    o.gammas = {1.0, 0.9};
    auto rep = analyze_design(p, Vector::Constant(1, 3.0), s, model, o);
    EXPECT_EQ(rep.n_prime, 4000u);
    EXPECT_EQ(rep.p_per.size(), 2u);
    EXPECT_EQ(rep.p_per[0].second.p, rep.p_nom.p);
    EXPECT_EQ(rep.per_requirement.size(), 1u);
    EXPECT_EQ(rep.per_requirement[0].p, rep.p_nom.p);
    ASSERT_TRUE(rep.mean_response.has_value());
    EXPECT_NEAR(*rep.mean_response, 2.0, 0.1);
    EXPECT_LE(rep.p_nom.lo, rep.p_nom.p);
    EXPECT_GE(rep.p_nom.hi, rep.p_nom.p);
}

TEST(Calibration, CoverageOfAnalyticProbabilities) {
    auto p = interval_cover_problem();
    const Vector th = Vector::Constant(1, 3.0);
    PerturbationModel model{PerturbationKind::Distribution, RadiusRule::constant(0.5), DistributionFamily::UniformInBall};
    int nom = 0, per = 0;
    const int reps = 60;
    for (int r = 0; r < reps; ++r) {
        auto s = uniform_scenarios(500, 0, 4, SeededSampler(100 + static_cast<std::uint64_t>(r)));
        nom += reliability(p, th, s).covers(0.25);
        per += robustness(p, th, s, model, 400, 0.95, SeededSampler(900 + static_cast<std::uint64_t>(r))).covers(0.3625);
    }
    EXPECT_GE(nom, 0.85 * reps);
    EXPECT_GE(per, 0.85 * reps);
}
