#include "srd/adaptive.hpp"
#include "srd/problems/interval_cover.hpp"
#include "srd/problems/wing_surrogate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace srd;

namespace {

DesignProblem delta_problem(int dim, DesignProblem::Requirements r, Eigen::Index n_r = 1) {
    DesignProblem p;
    p.name = "delta";
    p.n_theta = 1;
    p.n_delta = dim;
    p.n_r = n_r;
    p.theta_lower = Vector::Constant(1, -1);
    p.theta_upper = Vector::Constant(1, 1);
    p.delta_lower = Vector::Constant(dim, -1);
    p.delta_upper = Vector::Constant(dim, 1);
    p.objective = [](const Vector& t) { return t[0]; };
    p.requirements_fn = std::move(r);
    return p;
}


std::vector<Scenario> ones(const std::vector<double>& v) {
    std::vector<Scenario> s;
    for (double x : v) s.push_back(Scenario::Constant(1, x));
    return s;
}

}  // namespace

TEST(Adversarial, LinearOneDimensional) {
    auto p = delta_problem(1, [](const Vector&, const Vector& d, std::span<double> o) { o[0] = d[0]; });
    auto a = adversarial_point(p, Vector::Zero(1), Vector::Zero(1), 0.5);
    EXPECT_NEAR(a.point[0], 0.5, 1e-9);
}

TEST(Adversarial, QuadraticTwoDimensional) {
    auto p = delta_problem(2, [](const Vector&, const Vector& d, std::span<double> o) { o[0] = d[0] * d[0] + d[1]; });
    Vector dn(2);
    dn << 1, 0;
    auto a = adversarial_point(p, Vector::Zero(1), dn, std::sqrt(5.0));
    EXPECT_NEAR(a.point[0], 3.0, 1e-6);
    EXPECT_NEAR(a.point[1], 1.0, 1e-6);
}

TEST(Adversarial, DegenerateGradient) {
    auto p = delta_problem(2, [](const Vector&, const Vector&, std::span<double> o) { o[0] = 1.0; });
    EXPECT_THROW(adversarial_point(p, Vector::Zero(1), Vector::Zero(2), 1.0), DegenerateGradient);
    SeededSampler rng(1);
    auto a = adversarial_point_or_random(p, Vector::Zero(1), Vector::Zero(2), 1.5, rng);
    EXPECT_NEAR(a.point.norm(), 1.5, 1e-12);
}

TEST(Adversarial, WorstRequirementAndTies) {
    auto p = delta_problem(
        1,
        [](const Vector&, const Vector& d, std::span<double> o) {
            o[0] = d[0];
            o[1] = -d[0];
        },
        2);
    auto a = adversarial_point(p, Vector::Zero(1), Vector::Constant(1, -0.5), 0.1);
    EXPECT_EQ(a.k_hat, 1);
    EXPECT_NEAR(a.point[0], -0.6, 1e-9);
    auto t = adversarial_point(p, Vector::Zero(1), Vector::Zero(1), 0.1);
    EXPECT_TRUE(t.tie);
    EXPECT_EQ(t.k_hat, 0);
}

TEST(Adversarial, SurfaceAndAscentOnRandomSmoothInstances) {
    SeededSampler rng(55);
    for (int rep = 0; rep < 300; ++rep) {
        const int dim = 1 + static_cast<int>(rng.uniform() * 5);
        Vector a = Vector::Zero(dim), b = Vector::Zero(dim);
        for (int k = 0; k < dim; ++k) {
            a[k] = rng.uniform(-2, 2);
            b[k] = rng.uniform(-1, 1);
        }
        const double c = rng.uniform(-1, 1);
        auto p = delta_problem(dim, [a, b, c](const Vector& th, const Vector& d, std::span<double> o) {
            o[0] = a.dot(d) + c * std::sin(b.dot(d)) + 0.3 * d.squaredNorm() + th[0];
        });
        Vector dn(dim);
        for (int k = 0; k < dim; ++k) dn[k] = rng.uniform(-1, 1);
        const double mu = rng.uniform(1e-4, 1.0);
        auto res = adversarial_point(p, Vector::Zero(1), dn, mu);
        EXPECT_LE(std::abs((res.point - dn).norm() - mu), 1e-9 * mu);
        const double small = 1e-3 * std::min(1.0, mu);
        auto near = adversarial_point(p, Vector::Zero(1), dn, small);
        EXPECT_GE(p.requirements(Vector::Zero(1), near.point)[0], p.requirements(Vector::Zero(1), dn)[0] - 1e-8);
    }
}

TEST(Select, ClosestNegativeFirst) {
    auto p = interval_cover_problem(-10, 10, -10, 10);
    const Vector th = Vector::Zero(1);
    auto s = select_scenarios(p, th, ones({-5, -0.1, -2}), 1);
    EXPECT_EQ(s.indices, (std::vector<std::size_t>{1}));
    EXPECT_FALSE(s.warning);
    auto all = select_scenarios(p, th, ones({-5, -0.1, -2}), 3);
    EXPECT_EQ(std::set<std::size_t>(all.indices.begin(), all.indices.end()), (std::set<std::size_t>{0, 1, 2}));
    auto w = select_scenarios(p, th, ones({-1, 0.2, -3}), 2);
    EXPECT_EQ(std::set<std::size_t>(w.indices.begin(), w.indices.end()), (std::set<std::size_t>{0, 2}));
    EXPECT_FALSE(w.warning);
    auto short_list = select_scenarios(p, th, ones({-1, 0.2, -3}), 3);
    EXPECT_EQ(short_list.indices.size(), 2u);
    EXPECT_TRUE(short_list.warning);
    EXPECT_THROW(select_scenarios(p, th, ones({-1}), 2), InvalidInput);
}

TEST(AdversarialDataset, BudgetAndPoints) {
    auto p = interval_cover_problem(-10, 10, -10, 10);
    PerturbBudget b;
    auto d = adversarial_dataset(p, Vector::Zero(1), ones({-5, -0.1, -2, 1}), 2, RadiusRule::constant(0.5), 3, &b);
    EXPECT_EQ(b.q, (std::vector<int>{0, 1, 1, 0}));
    EXPECT_EQ(d.m(0), 1u);
    EXPECT_EQ(d.m(1), 2u);
    EXPECT_NEAR(d.points[1][1][0], 0.4, 1e-9);
    EXPECT_NEAR(d.points[2][1][0], -1.5, 1e-9);
    int total = 0;
    for (int q : b.q) total += q;
    EXPECT_EQ(total, 2);
}

TEST(Sequential, IntervalCoverGrowsTowardPoolMax) {
    auto p = interval_cover_problem();
    SeededSampler rng(3);
    std::vector<Scenario> train, pool;
    for (int i = 0; i < 10; ++i) train.push_back(Scenario::Constant(1, rng.uniform(0, 3)));
    for (int i = 0; i < 300; ++i) pool.push_back(Scenario::Constant(1, rng.uniform(0, 4)));
    FormulationSpec spec;
    spec.kind = FormulationKind::WorstCase;
    spec.rho = {10};
    SequentialOptions o;
    o.batch = 5;
    o.max_iterations = 40;
    SolverOptions so;
    auto res = sequential_design(p, train, spec, pool, o, so);
    EXPECT_EQ(res.status, SequentialStatus::TargetMet);
    EXPECT_FALSE(res.training_iid);
    double pool_max = 0;
    for (const auto& s : pool) pool_max = std::max(pool_max, s[0]);
    for (std::size_t i = 1; i < res.iterations.size(); ++i) {
        // a full batch, or every remaining violator when fewer are left
        EXPECT_GT(res.iterations[i].n_u, res.iterations[i - 1].n_u);
        EXPECT_LE(res.iterations[i].n_u, res.iterations[i - 1].n_u + 5);
        if (i + 1 < res.iterations.size()) {
            EXPECT_EQ(res.iterations[i].n_u, res.iterations[i - 1].n_u + 5);
        }
        EXPECT_GE(res.iterations[i].theta[0], res.iterations[i - 1].theta[0] - 1e-9);
        double train_max = 0;
        for (std::size_t j = 0; j < res.iterations[i].n_u; ++j) train_max = std::max(train_max, res.training[j][0]);
        EXPECT_NEAR(res.iterations[i].theta[0], train_max, 1e-4);  // closed-form worst-case optimum
    }
    EXPECT_NEAR(res.iterations.back().theta[0], pool_max, 1e-4);
    // the training set holds no pool point twice
    std::set<double> seen;
    for (std::size_t j = train.size(); j < res.training.size(); ++j) EXPECT_TRUE(seen.insert(res.training[j][0]).second);
}

TEST(Sequential, EarlyExit) {
    auto p = interval_cover_problem();
    FormulationSpec spec;
    spec.kind = FormulationKind::WorstCase;
    spec.rho = {10};
    auto res = sequential_design(p, ones({3.9}), spec, ones({1, 2, 3}), {}, {});
    ASSERT_EQ(res.iterations.size(), 1u);
    EXPECT_EQ(res.status, SequentialStatus::TargetMet);
    EXPECT_TRUE(res.training_iid);
}
