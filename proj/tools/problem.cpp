#include "problem.hpp"

#include <lmdp/domains.hpp>
#include <lmdp/error.hpp>
#include <lmdp/io.hpp>

#include "json.hpp"

#include <cmath>
#include <deque>
#include <filesystem>
#include <map>

namespace lmdp::cli {

using json = nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Cell cell_of(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidSpec, "cells are [row, column]");
    return {j[0].get<Index>(), j[1].get<Index>()};
}

void read_stack_options(const json& j, StackOptions& o) {
    o.penalty = get_or(j, "penalty", o.penalty);
    if (j.contains("kappa")) o.kappa = j.at("kappa").get<double>();
    o.higher_interior_reward = get_or(j, "higher_interior_reward", o.higher_interior_reward);
    if (j.contains("blend")) o.method = parse_blend_method(j.at("blend").get<std::string>());
}

void read_learning(const json& j, Problem& p) {
    p.learn_init = get_or(j, "init", p.learn_init);
    p.learn_c = get_or(j, "c", p.learn_c);
    p.epochs = get_or(j, "epochs", p.epochs);
    p.episodes = get_or(j, "episodes_per_epoch", p.episodes);
}

Problem ring_problem(const json& j, bool corridor) {
    RingSpec spec;
    spec.n_states = get_or<Index>(j, "n_states", 27);
    spec.spacing = get_or<Index>(j, "spacing", corridor ? 3 : 0);
    spec.depth = get_or<Index>(j, "depth", 0);
    spec.exit_prob = get_or(j, "exit_prob", spec.exit_prob);
    spec.interior_reward = get_or(j, "interior_reward", spec.interior_reward);
    spec.lambda = get_or(j, "lambda", spec.lambda);
    spec.subtask_weight = get_or(j, "subtask_weight", spec.subtask_weight);
    spec.task_penalty = get_or(j, "task_penalty", spec.task_penalty);
    spec.wrap = !corridor;
    RingDomain ring = make_ring(spec);

    Problem p;
    p.kind = corridor ? "corridor" : "ring";
    p.lmdp = std::make_shared<const Lmdp>(ring.lmdp);
    p.Q_b = ring.tasks;
    p.goal_column = get_or<Index>(j, "goal", spec.n_states - 1);
    if (p.goal_column < 0 || p.goal_column >= spec.n_states) throw Error(ErrorCode::InvalidSpec, "goal out of range");
    p.goal = ring.tasks.col(p.goal_column);
    std::vector<Index> targets = get_or(j, "targets", std::vector<Index>{p.goal_column, (p.goal_column + spec.n_states / 2) % spec.n_states});
    p.blend_target = Vector::Zero(spec.n_states);
    for (Index t : targets) {
        if (t < 0 || t >= spec.n_states) throw Error(ErrorCode::InvalidSpec, "blend target out of range");
        p.blend_target += ring.tasks.col(t) / static_cast<double>(targets.size());
    }
    p.levels = ring.levels;
    p.start = get_or<Index>(j, "start", 0);
    read_stack_options(j, p.stack);
    read_learning(j, p);
    return p;
}

Problem grid_problem(const GridSpec& spec, const std::vector<Cell>& subtasks, double weight, const json& j,
                     const Cell& start, const std::string& kind) {
    GridDomain g = make_four_rooms(spec, subtasks, weight);
    Problem p;
    p.kind = kind;
    p.lmdp = std::make_shared<const Lmdp>(g.lmdp);
    p.Q_b = g.Q_b;
    p.goal = g.goal;
    p.blend_target = g.goal;
    if (g.subtasks.n_subtasks() > 0) p.levels.push_back(g.subtasks);
    p.start = g.index_of(start);
    if (p.start < 0) throw Error(ErrorCode::BlockedCell, "start cell is not a free interior cell");
    p.shortest_path = grid_shortest_path(spec, start);
    p.stack.kappa = 100.0;
    p.stack.higher_interior_reward = -0.1;
    read_stack_options(j, p.stack);
    read_learning(j, p);
    return p;
}

Problem rooms_problem(const json& j, const std::filesystem::path& dir) {
    GridSpec spec;
    std::vector<Cell> subtasks;
    bool from_map = false;
    if (j.contains("map") || j.contains("map_text")) {
        const std::string text = j.contains("map_text") ? j.at("map_text").get<std::string>()
                                                        : io::read_text((dir / j.at("map").get<std::string>()).string());
        ParsedGrid parsed = parse_grid(text);
        spec = parsed.spec;
        subtasks = parsed.subtasks;
        from_map = true;
    } else {
        spec = four_rooms_spec(get_or<Index>(j, "size", 11));
    }
    spec.step_prob = get_or(j, "step_prob", spec.step_prob);
    spec.interior_reward = get_or(j, "interior_reward", spec.interior_reward);
    spec.lambda = get_or(j, "lambda", spec.lambda);
    spec.goal_penalty = get_or(j, "goal_penalty", spec.goal_penalty);
    if (j.contains("goal_cells")) {
        spec.goal_cells.clear();
        for (const auto& c : j.at("goal_cells")) spec.goal_cells.push_back(cell_of(c));
    }
    if (j.contains("subtasks")) {
        const json& s = j.at("subtasks");
        if (s.is_string()) {
            const std::string mode = s.get<std::string>();
            if (mode == "doors") subtasks.assign(spec.doors.begin(), spec.doors.end());
            else if (mode == "default") subtasks = four_rooms_subtasks(spec);
            else if (mode == "none") subtasks.clear();
            else throw Error(ErrorCode::InvalidSpec, "subtasks must be default, doors, none or a cell list");
        } else {
            subtasks.clear();
            for (const auto& c : s) subtasks.push_back(cell_of(c));
        }
    } else if (!from_map) {
        subtasks = four_rooms_subtasks(spec);
    }
    Cell start{0, 0};
    if (j.contains("start")) {
        start = cell_of(j.at("start"));
    } else {
        bool found = false;
        for (Index r = 0; r < spec.height && !found; ++r)
            for (Index c = 0; c < spec.width && !found; ++c) {
                const Cell cell{r, c};
                bool goal = false;
                for (const auto& g : spec.goal_cells) goal = goal || g == cell;
                if (!spec.blocked(cell) && !goal) {
                    start = cell;
                    found = true;
                }
            }
    }
    return grid_problem(spec, subtasks, get_or(j, "subtask_weight", 4.0), j, start, from_map ? "grid" : "four-rooms");
}

Problem arm_problem(const json& j) {
    ArmSpec spec;
    spec.bins = get_or<Index>(j, "bins", spec.bins);
    spec.l1 = get_or(j, "l1", spec.l1);
    spec.l2 = get_or(j, "l2", spec.l2);
    if (j.contains("target")) {
        const auto t = j.at("target").get<std::vector<double>>();
        if (t.size() != 4) throw Error(ErrorCode::InvalidSpec, "target is [x0, x1, y0, y1]");
        spec.target = {t[0], t[1], t[2], t[3]};
    }
    spec.exit_prob = get_or(j, "exit_prob", spec.exit_prob);
    spec.interior_reward = get_or(j, "interior_reward", spec.interior_reward);
    spec.lambda = get_or(j, "lambda", spec.lambda);
    spec.target_penalty = get_or(j, "target_penalty", spec.target_penalty);
    spec.basis_penalty = get_or(j, "basis_penalty", spec.basis_penalty);
    ArmDomain arm = make_arm(spec);
    Problem p;
    p.kind = "arm";
    p.lmdp = arm.basis.lmdp;
    p.Q_b = arm.basis.Q_b;
    p.goal = arm.target_q;
    p.blend_target = arm.target_q;
    p.start = get_or<Index>(j, "start", 0);
    read_stack_options(j, p.stack);
    read_learning(j, p);
    return p;
}

Matrix matrix_of(const json& rows) {
    Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    return m;
}

Problem lmdp_problem(const json& j) {
    Problem p;
    p.kind = "lmdp";
    p.lmdp = std::make_shared<const Lmdp>(io::lmdp_from_json(j.dump()));
    const Lmdp& L = *p.lmdp;
    p.goal = L.q_b();
    p.Q_b = j.contains("Q_b") ? matrix_of(j.at("Q_b")) : Matrix(Matrix::Identity(L.n_boundary(), L.n_boundary()));
    if (p.Q_b.rows() != L.n_boundary()) throw Error(ErrorCode::DimensionMismatch, "Q_b must have N_b rows");
    p.blend_target = p.goal;
    if (j.contains("q_target")) {
        const auto q = j.at("q_target").get<std::vector<double>>();
        p.blend_target = Eigen::Map<const Vector>(q.data(), static_cast<Index>(q.size()));
    }
    p.goal_column = get_or<Index>(j, "goal_column", 0);
    if (j.contains("P_t")) {
        SubtaskStructure st;
        const Index nt = get_or<Index>(j, "n_subtasks", 0);
        std::vector<Triplet> trip;
        Index rows = nt;
        for (const auto& e : j.at("P_t")) {
            const Index s = e.at(0).get<Index>();
            const Index t = e.at(1).get<Index>();
            if (s < 0 || s >= L.n_interior() || t < 0) throw Error(ErrorCode::DimensionMismatch, "P_t triple out of range");
            rows = std::max(rows, t + 1);
            trip.emplace_back(t, s, e.at(2).get<double>());
        }
        st.P_t.resize(rows, L.n_interior());
        st.P_t.setFromTriplets(trip.begin(), trip.end());
        p.levels.push_back(std::move(st));
    }
    p.start = get_or<Index>(j, "start", 0);
    read_stack_options(j, p.stack);
    read_learning(j, p);
    return p;
}

Problem problem_from_json(const json& j, const std::filesystem::path& dir) {
    if (j.contains("n_interior")) return lmdp_problem(j);
    const std::string type = get_or<std::string>(j, "type", "");
    if (type == "ring") return ring_problem(j, false);
    if (type == "corridor") return ring_problem(j, true);
    if (type == "four-rooms" || type == "grid") return rooms_problem(j, dir);
    if (type == "arm") return arm_problem(j);
    throw Error(ErrorCode::InvalidSpec, "unknown domain type '" + type + "'");
}

} // namespace

Index grid_shortest_path(const GridSpec& spec, const Cell& from) {
    std::map<Cell, Index> dist{{from, 0}};
    std::deque<Cell> queue{from};
    const Cell moves[4] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    while (!queue.empty()) {
        const Cell u = queue.front();
        queue.pop_front();
        for (const auto& g : spec.goal_cells)
            if (g == u) return dist[u];
        for (const auto& m : moves) {
            const Cell v{u.first + m.first, u.second + m.second};
            if (spec.blocked(v) || dist.count(v)) continue;
            dist[v] = dist[u] + 1;
            queue.push_back(v);
        }
    }
    return -1;
}

Problem load_problem(const std::string& name) {
    Problem p;
    if (name == "ring" || name == "corridor" || name == "four-rooms" || name == "arm") {
        json j = json::object();
        j["type"] = name;
        p = problem_from_json(j, ".");
        p.canonical = j.dump();
        return p;
    }
    namespace fs = std::filesystem;
    if (!fs::exists(name)) throw Error(ErrorCode::InvalidSpec, "domain '" + name + "' is neither built in nor a file");
    const std::string text = io::read_text(name);
    const fs::path dir = fs::path(name).parent_path();
    if (fs::path(name).extension() == ".json") {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        try {
            p = problem_from_json(j, dir);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidSpec, e.what());
        }
        json canon = j;
        if (j.contains("map")) canon["map_text"] = io::read_text((dir / j.at("map").get<std::string>()).string());
        p.canonical = canon.dump();
        return p;
    }
    json j = json::object();
    j["type"] = "grid";
    j["map_text"] = text;
    p = problem_from_json(j, dir);
    p.canonical = j.dump();
    return p;
}

} // namespace lmdp::cli
