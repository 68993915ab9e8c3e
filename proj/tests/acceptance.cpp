#include "oracles.hpp"
#include "problem.hpp"

#include <lmdp/domains.hpp>
#include <lmdp/executor.hpp>
#include <lmdp/io.hpp>
#include <lmdp/learning.hpp>
#include <lmdp/scaling.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <sys/wait.h>

using namespace lmdp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        o.pass = false;
        o.detail += fmt("; over time budget %.0f s", budget_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s %s  %s  [%s] (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::vector<Lmdp> random_instances(Index count, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<Index> ni(1, 45), nb(1, 5);
    std::vector<Lmdp> out;
    for (Index k = 0; k < count; ++k) out.push_back(oracle::random_lmdp(g, ni(g), nb(g)));
    return out;
}

Outcome ac1() {
    std::mt19937_64 g(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (const Lmdp& L : random_instances(100, 1)) {
        const Index nb = L.n_boundary();
        Vector q1(nb), q2(nb);
        for (Index k = 0; k < nb; ++k) {
            q1[k] = u(g);
            q2[k] = u(g);
        }
        const double a = 3.0 * u(g), b = 3.0 * u(g);
        const Vector z1 = solve_direct(L.P_i(), L.P_b(), L.q_i(), q1);
        const Vector z2 = solve_direct(L.P_i(), L.P_b(), L.q_i(), q2);
        const Vector zab = oracle::bellman_solve(L.P_i(), L.P_b(), L.q_i(), a * q1 + b * q2);
        const double scale = std::max(zab.cwiseAbs().maxCoeff(), 1e-300);
        worst = std::max(worst, (zab - (a * z1 + b * z2)).cwiseAbs().maxCoeff() / scale);
    }
    return {worst <= 1e-9, fmt("max relative error %.3g, tolerance 1e-9", worst)};
}

Outcome ac2() {
    const double tol = 1e-10;
    double worst = 0.0;
    bool monotone = true, converged = true;
    for (const Lmdp& L : random_instances(100, 1)) {
        const Desirability d = solve_direct(L);
        ZIterationOptions o;
        o.tol = tol;
        Vector prev = Vector::Zero(L.n_interior());
        o.observer = [&](const Vector& z) {
            if ((z.array() < prev.array() - 1e-15).any()) monotone = false;
            prev = z;
        };
        const auto r = solve_z_iteration(L, o);
        converged = converged && r.converged;
        worst = std::max(worst, (r.z.z_i - d.z_i).cwiseAbs().maxCoeff());
    }
    return {worst <= 10.0 * tol && monotone && converged,
            fmt("max |direct - z-iter| %.3g vs %.3g, monotone %s", worst, 10.0 * tol, monotone ? "yes" : "no")};
}

Outcome ac3() {
    struct Case {
        Lmdp L;
        SubtaskStructure st;
    };
    std::vector<Case> cases;
    std::mt19937_64 g(3);
    for (Index n : {8, 20, 30}) {
        Case c{oracle::random_lmdp(g, n, 2), {}};
        c.st.P_t.resize(3, n);
        c.st.P_t.insert(0, 0) = 0.5;
        c.st.P_t.insert(1, n / 2) = 1.0;
        c.st.P_t.insert(1, n / 2 + 1) = 0.3;
        c.st.P_t.insert(2, n - 1) = 2.0;
        cases.push_back(std::move(c));
    }
    {
        const RingDomain r = make_corridor(RingSpec{.n_states = 27, .spacing = 3});
        cases.push_back({r.lmdp, r.levels.front()});
    }
    double worst = 0.0, sum_dev = 0.0;
    std::mt19937_64 mc(1);
    for (const Case& c : cases) {
        const AugmentedMlmdp aug =
            augment(Mlmdp{std::make_shared<const Lmdp>(c.L), Matrix::Ones(c.L.n_boundary(), 1)}, c.st, -5.0);
        sum_dev = std::max(sum_dev, max_column_deviation(aug.augmented->P_i(), aug.augmented->P_b()));
        const HigherDynamics hd = derive_higher_layer(aug);
        sum_dev = std::max(sum_dev, max_column_deviation(hd.P_i, hd.P_b));
        if (aug.n_subtasks() > 3) continue;
        for (Index k = 0; k < aug.n_subtasks(); ++k) {
            const Vector f = oracle::absorption_frequencies(aug, k, 1000000, mc);
            for (Index j = 0; j < aug.n_subtasks(); ++j) worst = std::max(worst, std::abs(hd.P_i.coeff(j, k) - f[j]));
            for (Index b = 0; b < aug.n_boundary(); ++b)
                worst = std::max(worst, std::abs(hd.P_b.coeff(b, k) - f[aug.n_subtasks() + b]));
        }
    }
    return {worst <= 0.005 && sum_dev <= 1e-10,
            fmt("max |derived - Monte-Carlo| %.4f (tol 0.005), max column-sum deviation %.2g", worst, sum_dev)};
}

Outcome ac4() {
    std::mt19937_64 g(4);
    std::uniform_int_distribution<Index> nb(1, 8), nt(1, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -1e300, min_w = 1e300;
    for (int k = 0; k < 50; ++k) {
        const Index n_b = nb(g), n_t = nt(g);
        const Lmdp L = oracle::random_lmdp(g, 5, n_b);
        Matrix Q(n_b, n_t);
        for (Index i = 0; i < n_b; ++i)
            for (Index j = 0; j < n_t; ++j) Q(i, j) = u(g) < 0.3 ? std::exp(-10.0 * u(g)) : u(g) + 1e-3;
        Vector target(n_b);
        for (Index i = 0; i < n_b; ++i) target[i] = u(g) + 1e-3;
        const TaskBasis basis = build_task_basis(L, Q);
        const TaskWeights w = blend_weights(basis, target);
        const double best = oracle::nnls_enumeration(Q, target);
        worst = std::max(worst, w.residual - best);
        min_w = std::min(min_w, w.w.minCoeff());
    }
    return {worst <= 1e-9 && min_w >= 0.0,
            fmt("max residual excess over enumeration %.3g (tol 1e-9), min weight %.3g", worst, min_w)};
}

Outcome ac5() {
    const ArmDomain arm = make_arm(ArmSpec{});
    const auto sol = solve_novel_task(arm.basis, arm.target_q);
    const Lmdp L = arm.lmdp.with_boundary_rewards(arm.lmdp.lambda() * arm.target_q.array().log().matrix());
    const Vector ref = solve_direct(L).z_i;
    const Vector ind = oracle::bellman_solve(L);
    const double rel = (sol.z.z_i - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
    const double rel_oracle = (sol.z.z_i - ind).cwiseAbs().maxCoeff() / ind.cwiseAbs().maxCoeff();
    return {rel <= 1e-9 && rel_oracle <= 1e-9,
            fmt("K=17, %lld basis tasks, relative difference %.3g (direct), %.3g (elimination oracle)",
                static_cast<long long>(arm.basis.n_tasks()), rel, rel_oracle)};
}

Outcome ac6() {
    const std::vector<Index> sizes{16, 32, 64, 128, 256};
    const auto rows = scaling_benchmark(sizes);
    std::vector<double> n, fi, fz, hi, hz;
    bool converged = true;
    for (const auto& r : rows) {
        converged = converged && r.converged;
        if (r.condition == "flat") {
            n.push_back(static_cast<double>(r.n_states));
            fi.push_back(static_cast<double>(r.total_iterations));
            fz.push_back(static_cast<double>(r.nonzeros));
        } else {
            hi.push_back(static_cast<double>(r.total_iterations));
            hz.push_back(static_cast<double>(r.nonzeros));
        }
    }
    const double sfi = loglog_slope(n, fi), shi = loglog_slope(n, hi);
    const double sfz = loglog_slope(n, fz), shz = loglog_slope(n, hz);
    auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
    const bool ok = converged && in(sfi, 1.7, 2.3) && in(shi, 0.9, 1.4) && in(sfz, 1.7, 2.3) && in(shz, 0.9, 1.4);
    return {ok, fmt("iteration slopes flat %.3f [1.7,2.3], hierarchical %.3f [0.9,1.4]; "
                    "nonzero slopes flat %.3f, hierarchical %.3f",
                    sfi, shi, sfz, shz)};
}

Outcome ac7() {
    const cli::Problem p = cli::load_problem("four-rooms");
    HierarchyStack stack = build_stack(Mlmdp{p.lmdp, p.Q_b}, p.levels, p.goal, p.stack);
    TrainOptions t;
    t.epochs = p.epochs;
    t.episodes_per_epoch = p.episodes;
    t.start = p.start;
    t.init = p.learn_init;
    t.c = p.learn_c;
    t.goal_column = p.goal_column;
    const int seeds = 10;
    std::vector<double> first[2], last[2];
    for (int cond = 0; cond < 2; ++cond)
        for (int k = 0; k < seeds; ++k) {
            const std::uint64_t seed = static_cast<std::uint64_t>(k) + (cond == 0 ? 0u : 1000000u);
            const auto r = train(*p.lmdp, p.goal, cond == 0 ? nullptr : &stack, t, seed);
            first[cond].push_back(r.mean_length.front());
            last[cond].push_back(r.mean_length.back());
        }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto se = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    };
    const double diff = mean(first[0]) - mean(first[1]);
    const double z = diff / std::hypot(se(first[0]), se(first[1]));
    const double bound = 1.5 * static_cast<double>(p.shortest_path);
    const bool ok = z > 3.0 && mean(last[0]) <= bound && mean(last[1]) <= bound;
    return {ok, fmt("epoch 1 flat %.2f, hierarchical %.2f, difference %.2f standard errors (need > 3); "
                    "final flat %.2f, hierarchical %.2f, bound %.1f",
                    mean(first[0]), mean(first[1]), z, mean(last[0]), mean(last[1]), bound)};
}

Outcome ac8() {
    bool identical = true;
    {
        const GridDomain g = make_four_rooms(four_rooms_spec(11), {});
        const Lmdp L = g.lmdp.with_boundary_rewards(Vector::Zero(1));
        const PolicyMatrix a = optimal_policy(L, solve_direct(L));
        HierarchyStack s = build_stack(Mlmdp{std::make_shared<const Lmdp>(g.lmdp), g.Q_b}, {}, g.goal);
        Rng r1(17), r2(17);
        for (int e = 0; e < 200 && identical; ++e)
            identical = run_episode(s, 0, r2).base_states == rollout(a, L.n_interior(), 0, r1, 100 * L.n_interior());
    }

    const cli::Problem p = cli::load_problem("four-rooms");
    HierarchyStack stack = build_stack(Mlmdp{p.lmdp, p.Q_b}, p.levels, p.goal, p.stack);
    Rng rng(9);
    Index steps = 0, closed = 0;
    bool reentered = false;
    while (steps < 100000) {
        const auto traj = run_episode(stack, p.start, rng);
        steps += traj.steps();
        bool terminated = false;
        for (const auto& ev : traj.access_events) {
            reentered = reentered || terminated;
            terminated = terminated || ev.terminated_layer >= 0;
        }
        closed += terminated ? 1 : 0;
    }

    stack.reset();
    const Vector before = stack.state(0).weights.w;
    const Index nt = stack.model(1).lmdp->n_interior();
    const Vector pcol = Vector::Constant(nt, 1.0 / static_cast<double>(nt));
    const Vector r = inpaint_rewards(pcol, pcol, stack.kappa());
    stack.rewards_to_task_weights(0, r);
    const bool unchanged = r.isZero(0.0) && stack.state(0).weights.w == before;

    return {identical && !reentered && closed > 0 && unchanged,
            fmt("depth-1 bit-identical %s; %lld steps, %lld terminating episodes, re-entry %s; a = p inpaint unchanged %s",
                identical ? "yes" : "no", static_cast<long long>(steps), static_cast<long long>(closed),
                reentered ? "yes" : "no", unchanged ? "yes" : "no")};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LMDP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac9() {
    const fs::path root = fs::temp_directory_path() / "lmdp_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::string> cmds{
        "solve --domain ring --method z-iter",
        "solve --domain arm --method blend-nnls",
        "blend --domain arm",
        "stack --domain four-rooms",
        "simulate --domain four-rooms --episodes 5 --seed 3",
        "learn --domain four-rooms --seeds 2 --epochs 3 --seed 7",
        "bench --sizes 16,32",
    };
    Index files = 0;
    std::string bad;
    for (std::size_t k = 0; k < cmds.size(); ++k) {
        const fs::path a = root / (std::to_string(k) + "a"), b = root / (std::to_string(k) + "b");
        if (run_cli(cmds[k] + " --out " + a.string()) != 0 || run_cli(cmds[k] + " --out " + b.string()) != 0) {
            bad += " [" + cmds[k] + " failed]";
            continue;
        }
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            if (io::read_text(e.path().string()) != io::read_text((b / e.path().filename()).string()))
                bad += " [" + cmds[k] + ": " + e.path().filename().string() + "]";
        }
    }
    fs::remove_all(root);
    return {bad.empty() && files > 0,
            fmt("%lld files compared across %zu commands", static_cast<long long>(files), cmds.size()) +
                (bad.empty() ? "" : ", differences:" + bad)};
}

} // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
    criterion("AC1", "composition exactness", 10, ac1);
    criterion("AC2", "solver equivalence", 30, ac2);
    criterion("AC3", "higher-layer dynamics", 120, ac3);
    criterion("AC4", "blend optimality", 10, ac4);
    criterion("AC5", "arm compositionality", 60, ac5);
    criterion("AC6", "scaling", 600, ac6);
    criterion("AC7", "four-rooms learning", 300, ac7);
    criterion("AC8", "execution protocol", 60, ac8);
    criterion("AC9", "determinism", 300, ac9);
    std::printf("%d of 9 criteria failed\n", failures);
    return strict && failures > 0 ? 1 : 0;
}
