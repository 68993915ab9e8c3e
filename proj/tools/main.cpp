#include "problem.hpp"

#include <lmdp/domains.hpp>
#include <lmdp/error.hpp>
#include <lmdp/io.hpp>
#include <lmdp/learning.hpp>
#include <lmdp/scaling.hpp>
#include <lmdp/version.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace lmdp;
using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kNotConverged = 4;

struct Options {
    std::string domain;
    std::string method;
    double tol = 1e-10;
    Index max_iter = 1000000;
    std::optional<double> kappa;
    std::optional<double> penalty;
    std::uint64_t seed = 0;
    std::string out = "out";
    std::vector<Index> sizes{16, 32, 64, 128, 256};
    Index episodes = 1;
    std::optional<Index> epochs;
    std::optional<Index> episodes_per_epoch;
    Index seeds = 10;
};

class Run {
public:
    Run(std::string command, const Options& o, const cli::Problem* p) : out_dir_(o.out) {
        config_["command"] = std::move(command);
        config_["method"] = o.method;
        config_["tol"] = o.tol;
        config_["max_iter"] = o.max_iter;
        if (o.kappa) config_["kappa"] = *o.kappa;
        if (o.penalty) config_["penalty"] = *o.penalty;
        config_["episodes"] = o.episodes;
        if (o.epochs) config_["epochs"] = *o.epochs;
        if (o.episodes_per_epoch) config_["episodes_per_epoch"] = *o.episodes_per_epoch;
        config_["seeds"] = o.seeds;
        if (config_["command"] == "bench") config_["sizes"] = o.sizes;
        if (p != nullptr) config_["domain"] = p->canonical;
        manifest_["seed"] = o.seed;
        fs::create_directories(out_dir_);
    }

    void write(const std::string& name, const std::string& content) {
        io::write_text((fs::path(out_dir_) / name).string(), content);
        manifest_["outputs"].push_back(name);
    }

    json& manifest() { return manifest_; }

    void finish() {
        const std::string canon = config_.dump();
        manifest_["command"] = config_["command"];
        manifest_["version"] = version_string;
        manifest_["config_hash"] = io::hex64(io::fnv1a(canon));
        manifest_["config"] = config_;
        io::write_text((fs::path(out_dir_) / "manifest.json").string(), manifest_.dump(1) + "\n");
    }

private:
    std::string out_dir_;
    json config_;
    json manifest_ = json::object();
};

StackOptions stack_options(const cli::Problem& p, const Options& o) {
    StackOptions s = p.stack;
    if (o.kappa) s.kappa = *o.kappa;
    if (o.penalty) s.penalty = *o.penalty;
    if (!o.method.empty() && o.method.rfind("blend-", 0) == 0) s.method = parse_blend_method(o.method);
    return s;
}

Vector log_rewards(const Vector& q, double lambda) {
    if (!(q.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidSpec, "task must be strictly positive to define rewards");
    return lambda * q.array().log().matrix();
}

int cmd_solve(const Options& o) {
    const cli::Problem p = cli::load_problem(o.domain);
    const std::string method = o.method.empty() ? "direct" : o.method;
    Run run("solve", o, &p);
    const Lmdp L = p.lmdp->with_boundary_rewards(log_rewards(p.goal, p.lmdp->lambda()));
    Desirability z;
    bool converged = true;
    json& m = run.manifest();
    if (method == "direct") {
        z = solve_direct(L);
        m["iterations_used"] = 0;
    } else if (method == "z-iter") {
        const auto r = solve_z_iteration(L, o.tol, o.max_iter);
        z = r.z;
        converged = r.converged;
        m["iterations_used"] = r.iterations;
        m["last_change"] = r.last_change;
        const Desirability d = solve_direct(L);
        m["max_abs_difference_from_direct"] = (d.z_i - z.z_i).cwiseAbs().maxCoeff();
    } else if (method == "blend-nnls" || method == "blend-pinv") {
        const TaskBasis basis = build_task_basis(p.lmdp, p.Q_b);
        auto sol = solve_novel_task(basis, p.goal, parse_blend_method(method));
        z = sol.z;
        m["blend_residual"] = sol.weights.residual;
        run.write("weights.csv", io::weights_csv(sol.weights));
    } else {
        throw Error(ErrorCode::InvalidSpec, "unknown method '" + method + "'");
    }
    m["method"] = method;
    m["converged"] = converged;
    m["residuals"]["bellman"] = bellman_residual(L, z);
    run.write("z.csv", io::desirability_csv(L, z));
    run.write("policy.csv", io::policy_csv(optimal_policy(L, z)));
    run.finish();
    return converged ? kOk : kNotConverged;
}

int cmd_blend(const Options& o) {
    const cli::Problem p = cli::load_problem(o.domain);
    const std::string method = o.method.empty() ? "blend-nnls" : o.method;
    if (method != "blend-nnls" && method != "blend-pinv")
        throw Error(ErrorCode::InvalidSpec, "blend takes --method blend-nnls or blend-pinv");
    Run run("blend", o, &p);
    const TaskBasis basis = build_task_basis(p.lmdp, p.Q_b);
    const auto sol = solve_novel_task(basis, p.blend_target, parse_blend_method(method));
    json& m = run.manifest();
    m["method"] = method;
    m["n_tasks"] = basis.n_tasks();
    m["residuals"]["blend"] = sol.weights.residual;
    if (p.blend_target.minCoeff() > 0.0) {
        const Lmdp L = p.lmdp->with_boundary_rewards(log_rewards(p.blend_target, p.lmdp->lambda()));
        const Desirability d = solve_direct(L);
        m["residuals"]["relative_difference_from_direct"] =
            (d.z_i - sol.z.z_i).cwiseAbs().maxCoeff() / d.z_i.cwiseAbs().maxCoeff();
    }
    run.write("weights.csv", io::weights_csv(sol.weights));
    run.write("z.csv", io::desirability_csv(*p.lmdp, sol.z));
    run.finish();
    return kOk;
}

HierarchyStack make_stack(const cli::Problem& p, const Options& o) {
    return build_stack(Mlmdp{p.lmdp, p.Q_b}, p.levels, p.goal, stack_options(p, o));
}

int cmd_stack(const Options& o) {
    const cli::Problem p = cli::load_problem(o.domain);
    Run run("stack", o, &p);
    const HierarchyStack stack = make_stack(p, o);
    const auto docs = io::stack_to_json(stack);
    run.write("stack.json", docs.manifest);
    json& m = run.manifest();
    m["depth"] = stack.depth();
    for (Index l = 0; l < stack.depth(); ++l) {
        run.write("layer" + std::to_string(l) + ".json", docs.layers[static_cast<std::size_t>(l)]);
        const LayerModel& lm = stack.model(l);
        m["layer_sizes"].push_back(lm.lmdp->n_interior());
        m["residuals"]["column_deviation"].push_back(max_column_deviation(lm.lmdp->P_i(), lm.lmdp->P_b()));
        if (lm.augmented())
            for (const auto& w : lm.aug->warnings) m["warnings"].push_back(w);
    }
    run.finish();
    return kOk;
}

int cmd_simulate(const Options& o) {
    const cli::Problem p = cli::load_problem(o.domain);
    if (o.episodes < 1) throw Error(ErrorCode::InvalidSpec, "--episodes must be positive");
    Run run("simulate", o, &p);
    HierarchyStack stack = make_stack(p, o);
    stack.reset();
    const Desirability initial{desirability_map(stack), p.goal};
    run.write("map.csv", io::desirability_csv(*p.lmdp, initial));

    Rng rng(o.seed);
    std::string summary = "episode,steps,total_return,reached_boundary,access_events\n";
    bool finished = true;
    for (Index e = 0; e < o.episodes; ++e) {
        const auto traj = run_episode(stack, p.start, rng);
        finished = finished && traj.reached_boundary;
        if (e == 0) {
            run.write("trajectory.csv", io::trajectory_csv(traj, *p.lmdp));
            run.write("snapshots.csv", io::snapshots_csv(traj));
        }
        summary += std::to_string(e) + "," + std::to_string(traj.steps()) + "," + io::format_double(traj.total_return) +
                   "," + (traj.reached_boundary ? "1" : "0") + "," + std::to_string(traj.access_events.size()) + "\n";
    }
    run.write("episodes.csv", summary);
    run.manifest()["depth"] = stack.depth();
    run.manifest()["all_reached_boundary"] = finished;
    run.finish();
    return finished ? kOk : kNotConverged;
}

int cmd_learn(const Options& o) {
    const cli::Problem p = cli::load_problem(o.domain);
    if (o.seeds < 1) throw Error(ErrorCode::InvalidSpec, "--seeds must be positive");
    Run run("learn", o, &p);
    HierarchyStack stack = make_stack(p, o);
    TrainOptions t;
    t.epochs = o.epochs.value_or(p.epochs);
    t.episodes_per_epoch = o.episodes_per_epoch.value_or(p.episodes);
    t.start = p.start;
    t.init = p.learn_init;
    t.c = p.learn_c;
    t.goal_column = p.goal_column;

    std::string csv = "epoch,mean_length,stderr,condition,seed\n";
    std::vector<double> first[2], last[2];
    for (int cond = 0; cond < 2; ++cond) {
        const char* name = cond == 0 ? "flat" : "hierarchical";
        for (Index k = 0; k < o.seeds; ++k) {
            const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(k) + (cond == 0 ? 0u : 1000000u);
            const auto r = train(*p.lmdp, p.goal, cond == 0 ? nullptr : &stack, t, seed);
            for (std::size_t e = 0; e < r.mean_length.size(); ++e)
                csv += std::to_string(e + 1) + "," + io::format_double(r.mean_length[e]) + "," +
                       io::format_double(r.stderr_length[e]) + "," + name + "," + std::to_string(seed) + "\n";
            if (!r.mean_length.empty()) {
                first[cond].push_back(r.mean_length.front());
                last[cond].push_back(r.mean_length.back());
            }
        }
    }
    run.write("curve.csv", csv);
    json& m = run.manifest();
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    m["epoch1_mean"] = {{"flat", mean(first[0])}, {"hierarchical", mean(first[1])}};
    m["final_mean"] = {{"flat", mean(last[0])}, {"hierarchical", mean(last[1])}};
    if (p.shortest_path >= 0) m["shortest_path"] = p.shortest_path;
    m["depth"] = stack.depth();
    run.finish();
    return kOk;
}

int cmd_bench(const Options& o) {
    for (Index n : o.sizes)
        if (n < 3) throw Error(ErrorCode::InvalidSpec, "ring sizes must be at least 3");
    Run run("bench", o, nullptr);
    ScalingOptions so;
    so.tol = o.tol;
    so.max_iter = o.max_iter;
    const auto rows = scaling_benchmark(o.sizes, so);
    run.write("scaling.csv", io::scaling_csv(rows));
    bool converged = true;
    std::vector<double> n, fi, hi, fz, hz;
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
    json& m = run.manifest();
    if (n.size() >= 2) {
        m["slopes"]["flat_iterations"] = loglog_slope(n, fi);
        m["slopes"]["hierarchical_iterations"] = loglog_slope(n, hi);
        m["slopes"]["flat_nonzeros"] = loglog_slope(n, fz);
        m["slopes"]["hierarchical_nonzeros"] = loglog_slope(n, hz);
    }
    m["converged"] = converged;
    run.finish();
    return converged ? kOk : kNotConverged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linearly solvable MDPs, task blending and hierarchical stacks"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* sub, bool domain) {
        if (domain) sub->add_option("--domain", o.domain, "ring, corridor, four-rooms, arm, or a JSON / ASCII map file")->required();
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
    };
    auto add_hierarchy = [&o](CLI::App* sub) {
        sub->add_option("--kappa", o.kappa, "inpainting scale");
        sub->add_option("--penalty", o.penalty, "subtask penalty in units of lambda");
        sub->add_option("--method", o.method, "blend-nnls or blend-pinv");
    };

    auto* solve = app.add_subcommand("solve", "solve the domain's goal task");
    add_common(solve, true);
    solve->add_option("--method", o.method, "direct, z-iter, blend-nnls or blend-pinv");
    solve->add_option("--tol", o.tol, "z-iteration tolerance")->capture_default_str();
    solve->add_option("--max-iter", o.max_iter, "z-iteration sweep limit")->capture_default_str();

    auto* blend = app.add_subcommand("blend", "compose the blend target from the task basis");
    add_common(blend, true);
    blend->add_option("--method", o.method, "blend-nnls or blend-pinv");

    auto* stack = app.add_subcommand("stack", "build and serialize the hierarchy");
    add_common(stack, true);
    add_hierarchy(stack);

    auto* simulate = app.add_subcommand("simulate", "run hierarchical episodes");
    add_common(simulate, true);
    add_hierarchy(simulate);
    simulate->add_option("--episodes", o.episodes, "number of episodes")->capture_default_str();

    auto* learn = app.add_subcommand("learn", "Z-learning with and without the hierarchy");
    add_common(learn, true);
    add_hierarchy(learn);
    learn->add_option("--epochs", o.epochs, "epochs per run");
    learn->add_option("--episodes", o.episodes_per_epoch, "episodes per epoch");
    learn->add_option("--seeds", o.seeds, "runs per condition")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "ring scaling benchmark");
    add_common(bench, false);
    bench->add_option("--sizes", o.sizes, "ring sizes")->delimiter(',')->capture_default_str();
    bench->add_option("--tol", o.tol, "relative z-iteration tolerance")->capture_default_str();
    bench->add_option("--max-iter", o.max_iter, "sweep limit per task")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (solve->parsed()) return cmd_solve(o);
        if (blend->parsed()) return cmd_blend(o);
        if (stack->parsed()) return cmd_stack(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (learn->parsed()) return cmd_learn(o);
        if (bench->parsed()) return cmd_bench(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_numerical(e.code()) ? kNumericalError : kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
