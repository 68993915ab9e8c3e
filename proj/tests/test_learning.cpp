#include "oracles.hpp"

#include <lmdp/domains.hpp>
#include <lmdp/learning.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace lmdp;

namespace {

struct RingProblem {
    Lmdp lmdp;
    Vector goal;
    Vector z;
};

RingProblem ring20() {
    RingSpec spec;
    spec.n_states = 20;
    spec.interior_reward = -0.5;
    const RingDomain r = make_ring(spec);
    Vector goal(20);
    for (Index k = 0; k < 20; ++k) goal[k] = std::exp(-0.25 * static_cast<double>(std::min<Index>(k, 20 - k)));
    const Vector z = oracle::bellman_solve(r.lmdp.P_i(), r.lmdp.P_b(), r.lmdp.q_i(), goal);
    return {r.lmdp, goal, z};
}

/// On-policy Z-learning from passive samples; restarts uniformly after absorption.
std::vector<double> passive_learning(const RingProblem& p, std::uint64_t seed, Index steps, Index every) {
    const Lmdp& L = p.lmdp;
    const Index ni = L.n_interior();
    LearningState st(ni, p.goal, 1e-6);
    const Desirability flat{Vector::Ones(ni), Vector::Ones(L.n_boundary())};
    const PolicyMatrix passive = optimal_policy(L, flat);
    Rng rng(seed);
    std::vector<double> errors;
    Index s = static_cast<Index>(rng() % static_cast<std::uint64_t>(ni));
    for (Index t = 1; t <= steps; ++t) {
        const Index next = sample_transition(passive, s, rng);
        z_learning_update(st, s, L.rewards().r_i[s], next, L.lambda());
        s = next < ni ? next : static_cast<Index>(rng() % static_cast<std::uint64_t>(ni));
        if (t % every == 0) errors.push_back((st.z_hat - p.z).norm() / p.z.norm());
    }
    return errors;
}

} // namespace

TEST(ZLearning, ZeroStepSizeLeavesEstimate) {
    LearningState st(3, Vector::Ones(1), 0.5);
    z_learning_step(st, 1, -1.0, 2, 1.0, 0.0);
    EXPECT_EQ(st.z_hat, Vector::Constant(3, 0.5));
}

TEST(ZLearning, FullStepsOnDeterministicChainAreExact) {
    const Index n = 6;
    SparseMatrix Pi(n, n), Pb(1, n);
    for (Index s = 0; s + 1 < n; ++s) Pi.insert(s + 1, s) = 1.0;
    Pb.insert(0, n - 1) = 1.0;
    const Lmdp L = build_lmdp({n, 1, {}}, {Pi, Pb}, {Vector::Constant(n, -0.7), Vector::Constant(1, -2.0), 1.0});
    LearningState st(n, L.q_b(), 1e-6);
    for (Index s = n - 1; s >= 0; --s) z_learning_step(st, s, L.rewards().r_i[s], s + 1, L.lambda(), 1.0);
    EXPECT_LT((st.z_hat - solve_direct(L).z_i).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ZLearning, HarmonicStepSize) {
    LearningState st(2, Vector::Ones(1), 1.0, 50.0);
    EXPECT_DOUBLE_EQ(st.next_alpha(0), 50.0 / 51.0);
    z_learning_update(st, 0, 0.0, 2, 1.0);
    EXPECT_EQ(st.visits[0], 1.0);
    EXPECT_DOUBLE_EQ(st.next_alpha(0), 50.0 / 52.0);
    EXPECT_THROW(LearningState(2, Vector::Ones(1), 0.0), std::exception);
}

TEST(ZLearning, RingConvergesFromPassiveSamples) {
    const RingProblem p = ring20();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto err = passive_learning(p, seed, 500000, 500000);
        EXPECT_LT(err.back(), 0.1) << "seed " << seed;
    }
}

TEST(ZLearning, ErrorDecreasesAcrossCheckpoints) {
    const RingProblem p = ring20();
    std::vector<double> mean(5, 0.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto err = passive_learning(p, 100 + seed, 500000, 100000);
        for (std::size_t k = 0; k < 5; ++k) mean[k] += err[k] / 10.0;
    }
    for (std::size_t k = 1; k < 5; ++k) EXPECT_LT(mean[k], mean[k - 1]);
}

TEST(ZLearning, EstimateStaysPositive) {
    const RingProblem p = ring20();
    TrainOptions o;
    o.epochs = 2;
    o.episodes_per_epoch = 5;
    const TrainResult r = train(p.lmdp, p.goal, nullptr, o, 3);
    EXPECT_GT(r.state.z_hat.minCoeff(), 0.0);
}

TEST(Train, ZeroEpochsGiveEmptyCurve) {
    const RingProblem p = ring20();
    TrainOptions o;
    o.epochs = 0;
    const TrainResult r = train(p.lmdp, p.goal, nullptr, o, 1);
    EXPECT_TRUE(r.mean_length.empty());
    EXPECT_TRUE(r.state.curve.empty());
}

TEST(Train, FlatLearnerIsTheDepthOneExecutor) {
    const GridDomain g = make_four_rooms(four_rooms_spec(11), {});
    HierarchyStack flat = build_stack(Mlmdp{std::make_shared<const Lmdp>(g.lmdp), Matrix(g.goal)}, {}, g.goal);
    TrainOptions o;
    o.epochs = 3;
    o.episodes_per_epoch = 4;
    const TrainResult a = train(g.lmdp, g.goal, nullptr, o, 77);
    const TrainResult b = train(g.lmdp, g.goal, &flat, o, 77);
    EXPECT_EQ(a.state.z_hat, b.state.z_hat);
    EXPECT_EQ(a.mean_length, b.mean_length);
}

TEST(Train, CurveHasOneEntryPerEpoch) {
    const GridDomain g = make_four_rooms(four_rooms_spec(11), four_rooms_subtasks(four_rooms_spec(11)), 4.0);
    StackOptions so;
    so.kappa = 100.0;
    so.higher_interior_reward = -0.1;
    HierarchyStack s = build_stack(Mlmdp{std::make_shared<const Lmdp>(g.lmdp), g.Q_b}, {g.subtasks}, g.goal, so);
    TrainOptions o;
    o.epochs = 2;
    o.episodes_per_epoch = 3;
    const TrainResult r = train(g.lmdp, g.goal, &s, o, 5);
    EXPECT_EQ(r.mean_length.size(), 2u);
    EXPECT_EQ(r.stderr_length.size(), 2u);
    EXPECT_EQ(r.state.epoch, 2);
    EXPECT_GT(r.state.visits.sum(), 0.0);
}
