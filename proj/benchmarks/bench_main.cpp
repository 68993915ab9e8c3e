#include <lmdp/domains.hpp>
#include <lmdp/executor.hpp>
#include <lmdp/nnls.hpp>
#include <lmdp/scaling.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace lmdp;

static void BM_DirectSolveRing(benchmark::State& state) {
    const RingDomain r = make_ring(RingSpec{.n_states = state.range(0)});
    for (auto _ : state) benchmark::DoNotOptimize(solve_direct(r.lmdp));
}
BENCHMARK(BM_DirectSolveRing)->RangeMultiplier(4)->Range(16, 1024);

static void BM_ZIterationRing(benchmark::State& state) {
    const RingDomain r = make_ring(RingSpec{.n_states = state.range(0)});
    for (auto _ : state) benchmark::DoNotOptimize(solve_z_iteration(r.lmdp));
}
BENCHMARK(BM_ZIterationRing)->RangeMultiplier(4)->Range(16, 256);

static void BM_Nnls(benchmark::State& state) {
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Index n = state.range(0);
    Matrix A(2 * n, n);
    Vector b(2 * n);
    for (Index i = 0; i < A.rows(); ++i) {
        b[i] = u(g);
        for (Index j = 0; j < n; ++j) A(i, j) = u(g);
    }
    for (auto _ : state) benchmark::DoNotOptimize(nnls(A, b));
}
BENCHMARK(BM_Nnls)->RangeMultiplier(2)->Range(4, 64);

static void BM_ArmBlend(benchmark::State& state) {
    const ArmDomain arm = make_arm(ArmSpec{});
    for (auto _ : state) benchmark::DoNotOptimize(solve_novel_task(arm.basis, arm.target_q));
}
BENCHMARK(BM_ArmBlend)->Unit(benchmark::kMillisecond);

static void BM_BuildFourRoomsStack(benchmark::State& state) {
    const GridSpec spec = four_rooms_spec(11);
    const GridDomain g = make_four_rooms(spec, four_rooms_subtasks(spec), 4.0);
    const Mlmdp base{std::make_shared<const Lmdp>(g.lmdp), g.Q_b};
    for (auto _ : state) benchmark::DoNotOptimize(build_stack(base, {g.subtasks}, g.goal));
}
BENCHMARK(BM_BuildFourRoomsStack)->Unit(benchmark::kMillisecond);

static void BM_FourRoomsEpisode(benchmark::State& state) {
    const GridSpec spec = four_rooms_spec(11);
    const GridDomain g = make_four_rooms(spec, four_rooms_subtasks(spec), 4.0);
    StackOptions o;
    o.kappa = 100.0;
    o.higher_interior_reward = -0.1;
    HierarchyStack s = build_stack(Mlmdp{std::make_shared<const Lmdp>(g.lmdp), g.Q_b}, {g.subtasks}, g.goal, o);
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(run_episode(s, 0, rng));
}
BENCHMARK(BM_FourRoomsEpisode)->Unit(benchmark::kMicrosecond);

static void BM_HierarchicalScaling(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(hierarchical_scaling(state.range(0)));
}
BENCHMARK(BM_HierarchicalScaling)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
