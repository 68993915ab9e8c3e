#include "lmdp/domains.hpp"
#include "lmdp/error.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <sstream>

namespace lmdp {

// ---------------------------------------------------------------- ring

Index default_spacing(Index n_states) {
    return std::max<Index>(2, static_cast<Index>(std::ceil(std::log(static_cast<double>(n_states)))));
}

std::vector<Index> ring_layer_sizes(Index n_states, Index spacing, Index depth) {
    std::vector<Index> sizes{n_states};
    while (sizes.back() > spacing && (depth <= 0 || static_cast<Index>(sizes.size()) < depth))
        sizes.push_back((sizes.back() + spacing - 1) / spacing);
    return sizes;
}

RingDomain make_ring(const RingSpec& spec) {
    const Index n = spec.n_states;
    if (n < 3) throw Error(ErrorCode::InvalidSpec, "ring needs at least 3 states");
    if (!(spec.exit_prob > 0.0 && spec.exit_prob <= 1.0 / 3.0))
        throw Error(ErrorCode::InvalidSpec, "exit probability must lie in (0, 1/3]");
    const Index M = spec.spacing > 0 ? spec.spacing : default_spacing(n);
    if (M < 2) throw Error(ErrorCode::InvalidSpec, "subtask spacing must be at least 2");

    const double third = 1.0 / 3.0;
    std::vector<Triplet> ti;
    std::vector<Triplet> tb;
    for (Index s = 0; s < n; ++s) {
        double stay = third - spec.exit_prob;
        if (spec.wrap || s > 0) ti.emplace_back((s + n - 1) % n, s, third);
        else stay += third;
        if (spec.wrap || s < n - 1) ti.emplace_back((s + 1) % n, s, third);
        else stay += third;
        if (stay > 0.0) ti.emplace_back(s, s, stay);
        tb.emplace_back(s, s, spec.exit_prob);
    }
    SparseMatrix Pi(n, n), Pb(n, n);
    Pi.setFromTriplets(ti.begin(), ti.end());
    Pb.setFromTriplets(tb.begin(), tb.end());

    StatePartition part{n, n, {}};
    for (Index s = 0; s < n; ++s) part.labels.push_back("s" + std::to_string(s));
    for (Index s = 0; s < n; ++s) part.labels.push_back("exit" + std::to_string(s));
    RewardModel rew{Vector::Constant(n, spec.interior_reward), Vector::Zero(n), spec.lambda};

    RingDomain out{build_lmdp(std::move(part), {std::move(Pi), std::move(Pb)}, std::move(rew)), {}, {}, {}, M};
    out.tasks = default_subtask_rewards(n, spec.task_penalty * spec.lambda, spec.lambda);
    out.layer_sizes = ring_layer_sizes(n, M, spec.depth);
    for (std::size_t l = 0; l + 1 < out.layer_sizes.size(); ++l) {
        const Index nl = out.layer_sizes[l];
        const Index nt = out.layer_sizes[l + 1];
        SubtaskStructure st;
        st.P_t.resize(nt, nl);
        std::vector<Triplet> tt;
        for (Index k = 0; k < nt; ++k) {
            tt.emplace_back(k, k * M, spec.subtask_weight);
            st.labels.push_back("L" + std::to_string(l + 1) + ":" + std::to_string(k));
        }
        st.P_t.setFromTriplets(tt.begin(), tt.end());
        out.levels.push_back(std::move(st));
    }
    return out;
}

RingDomain make_corridor(RingSpec spec) {
    spec.wrap = false;
    return make_ring(spec);
}

// ---------------------------------------------------------------- grid

bool GridSpec::inside(const Cell& c) const {
    return c.first >= 0 && c.first < height && c.second >= 0 && c.second < width;
}

bool GridSpec::blocked(const Cell& c) const {
    return !inside(c) || (walls.count(c) > 0 && doors.count(c) == 0);
}

Index GridDomain::index_of(const Cell& c) const {
    for (std::size_t k = 0; k < interior_cells.size(); ++k)
        if (interior_cells[k] == c) return static_cast<Index>(k);
    return -1;
}

GridSpec four_rooms_spec(Index size) {
    if (size < 5) throw Error(ErrorCode::InvalidSpec, "four-rooms grid needs size >= 5");
    GridSpec g;
    g.width = g.height = size;
    const Index mid = size / 2;
    const Index d0 = mid / 2;
    const Index d1 = mid + (size - mid) / 2;
    for (Index k = 0; k < size; ++k) {
        g.walls.insert({mid, k});
        g.walls.insert({k, mid});
    }
    g.doors = {{mid, d0}, {mid, d1}, {d0, mid}, {d1, mid}};
    g.goal_cells = {{size - 1, size - 1}};
    return g;
}

std::vector<Cell> four_rooms_subtasks(const GridSpec& spec) {
    const Index mid = spec.height / 2;
    const Index midc = spec.width / 2;
    std::vector<Cell> out(spec.doors.begin(), spec.doors.end());
    for (Index r0 : {Index{0}, mid + 1})
        for (Index c0 : {Index{0}, midc + 1})
            for (Index a : {1, 3})
                for (Index b : {1, 3}) {
                    const Cell c{r0 + a, c0 + b};
                    bool goal = false;
                    for (const auto& g : spec.goal_cells) goal = goal || g == c;
                    if (!spec.blocked(c) && !goal) out.push_back(c);
                }
    return out;
}

GridDomain make_four_rooms(const GridSpec& spec, const std::vector<Cell>& subtask_cells,
                           double subtask_weight) {
    if (spec.width < 1 || spec.height < 1) throw Error(ErrorCode::InvalidSpec, "empty grid");
    if (spec.goal_cells.empty()) throw Error(ErrorCode::InvalidSpec, "grid needs a goal cell");
    if (!(spec.step_prob > 0.0 && 4.0 * spec.step_prob <= 1.0))
        throw Error(ErrorCode::InvalidSpec, "step probability must lie in (0, 1/4]");

    std::map<Cell, Index> goal_index;
    for (const auto& g : spec.goal_cells) {
        if (spec.blocked(g)) throw Error(ErrorCode::BlockedCell, "goal on a blocked cell");
        goal_index.emplace(g, static_cast<Index>(goal_index.size()));
    }

    GridDomain out{Lmdp{}, {}, {}, {}, {}, subtask_cells, spec};
    std::map<Cell, Index> index;
    for (Index r = 0; r < spec.height; ++r)
        for (Index c = 0; c < spec.width; ++c) {
            const Cell cell{r, c};
            if (spec.blocked(cell) || goal_index.count(cell)) continue;
            index.emplace(cell, static_cast<Index>(out.interior_cells.size()));
            out.interior_cells.push_back(cell);
        }
    const Index ni = static_cast<Index>(out.interior_cells.size());
    const Index nb = static_cast<Index>(goal_index.size());
    if (ni < 1) throw Error(ErrorCode::InvalidSpec, "grid has no free interior cell");

    std::vector<Triplet> ti, tb;
    const Cell moves[4] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    for (Index s = 0; s < ni; ++s) {
        const Cell cell = out.interior_cells[static_cast<std::size_t>(s)];
        double stay = 1.0;
        for (const auto& mv : moves) {
            const Cell nx{cell.first + mv.first, cell.second + mv.second};
            if (spec.blocked(nx)) continue;
            stay -= spec.step_prob;
            if (auto g = goal_index.find(nx); g != goal_index.end()) tb.emplace_back(g->second, s, spec.step_prob);
            else ti.emplace_back(index.at(nx), s, spec.step_prob);
        }
        if (stay > 0.0) ti.emplace_back(s, s, stay);
    }
    SparseMatrix Pi(ni, ni), Pb(nb, ni);
    Pi.setFromTriplets(ti.begin(), ti.end());
    Pb.setFromTriplets(tb.begin(), tb.end());

    StatePartition part{ni, nb, {}};
    for (const auto& c : out.interior_cells)
        part.labels.push_back(std::to_string(c.first) + ":" + std::to_string(c.second));
    for (const auto& g : spec.goal_cells)
        part.labels.push_back("G" + std::to_string(g.first) + ":" + std::to_string(g.second));
    RewardModel rew{Vector::Constant(ni, spec.interior_reward), Vector::Zero(nb), spec.lambda};
    try {
        out.lmdp = build_lmdp(std::move(part), {std::move(Pi), std::move(Pb)}, std::move(rew));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoAbsorption)
            throw Error(ErrorCode::InvalidSpec, std::string("free space is not connected to a goal: ") + e.what());
        throw;
    }

    out.goal = Vector::Ones(nb);
    out.Q_b = default_subtask_rewards(nb, spec.goal_penalty * spec.lambda, spec.lambda);

    SubtaskStructure st;
    st.P_t.resize(static_cast<Index>(subtask_cells.size()), ni);
    std::vector<Triplet> tt;
    for (std::size_t k = 0; k < subtask_cells.size(); ++k) {
        const Cell& c = subtask_cells[k];
        if (spec.blocked(c)) throw Error(ErrorCode::BlockedCell, "subtask on a blocked cell");
        auto it = index.find(c);
        if (it == index.end()) throw Error(ErrorCode::BlockedCell, "subtask on a goal cell");
        tt.emplace_back(static_cast<Index>(k), it->second, subtask_weight);
        st.labels.push_back("S" + std::to_string(c.first) + ":" + std::to_string(c.second));
    }
    st.P_t.setFromTriplets(tt.begin(), tt.end());
    out.subtasks = std::move(st);
    return out;
}

ParsedGrid parse_grid(const std::string& ascii) {
    ParsedGrid out;
    std::vector<std::string> rows;
    std::istringstream in(ascii);
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, "empty grid map");
    out.spec.height = static_cast<Index>(rows.size());
    out.spec.width = static_cast<Index>(rows.front().size());
    for (Index r = 0; r < out.spec.height; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Index>(row.size()) != out.spec.width)
            throw Error(ErrorCode::ParseError, "grid rows differ in length at row " + std::to_string(r));
        for (Index c = 0; c < out.spec.width; ++c) {
            switch (row[static_cast<std::size_t>(c)]) {
            case '#': out.spec.walls.insert({r, c}); break;
            case '.': break;
            case 'G': out.spec.goal_cells.push_back({r, c}); break;
            case 'S': out.subtasks.push_back({r, c}); break;
            default:
                throw Error(ErrorCode::ParseError, std::string("unknown grid symbol '") +
                                                       row[static_cast<std::size_t>(c)] + "'");
            }
        }
    }
    return out;
}

std::string render_grid(const GridSpec& spec, const std::vector<Cell>& subtasks) {
    std::string out;
    for (Index r = 0; r < spec.height; ++r) {
        for (Index c = 0; c < spec.width; ++c) {
            const Cell cell{r, c};
            char ch = spec.blocked(cell) ? '#' : '.';
            for (const auto& s : subtasks) if (s == cell) ch = 'S';
            for (const auto& g : spec.goal_cells) if (g == cell) ch = 'G';
            out.push_back(ch);
        }
        out.push_back('\n');
    }
    return out;
}

// ---------------------------------------------------------------- arm

double joint_angle(Index bin, Index bins) {
    return -std::numbers::pi + (static_cast<double>(bin) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(bins);
}

std::pair<double, double> end_effector(double l1, double l2, double a1, double a2) {
    return {l1 * std::cos(a1) + l2 * std::cos(a1 + a2), l1 * std::sin(a1) + l2 * std::sin(a1 + a2)};
}

ArmDomain make_arm(const ArmSpec& spec) {
    const Index K = spec.bins;
    if (K < 3) throw Error(ErrorCode::InvalidSpec, "arm needs at least 3 bins per joint");
    if (!(spec.l1 > 0.0 && spec.l2 > 0.0)) throw Error(ErrorCode::InvalidSpec, "link lengths must be positive");
    if (!(spec.exit_prob > 0.0 && spec.exit_prob <= 0.2))
        throw Error(ErrorCode::InvalidSpec, "exit probability must lie in (0, 0.2]");
    const Index n = K * K;
    auto id = [K](Index i, Index j) { return ((i + K) % K) * K + ((j + K) % K); };

    std::vector<Triplet> ti, tb;
    for (Index i = 0; i < K; ++i)
        for (Index j = 0; j < K; ++j) {
            const Index s = id(i, j);
            ti.emplace_back(id(i + 1, j), s, 0.2);
            ti.emplace_back(id(i - 1, j), s, 0.2);
            ti.emplace_back(id(i, j + 1), s, 0.2);
            ti.emplace_back(id(i, j - 1), s, 0.2);
            if (spec.exit_prob < 0.2) ti.emplace_back(s, s, 0.2 - spec.exit_prob);
            tb.emplace_back(s, s, spec.exit_prob);
        }
    SparseMatrix Pi(n, n), Pb(n, n);
    Pi.setFromTriplets(ti.begin(), ti.end());
    Pb.setFromTriplets(tb.begin(), tb.end());

    StatePartition part{n, n, {}};
    for (Index s = 0; s < n; ++s) part.labels.push_back("q" + std::to_string(s / K) + ":" + std::to_string(s % K));
    for (Index s = 0; s < n; ++s) part.labels.push_back("reach" + std::to_string(s / K) + ":" + std::to_string(s % K));
    RewardModel rew{Vector::Constant(n, spec.interior_reward), Vector::Zero(n), spec.lambda};
    auto lmdp = std::make_shared<const Lmdp>(build_lmdp(std::move(part), {std::move(Pi), std::move(Pb)}, std::move(rew)));

    Vector target = Vector::Constant(n, std::exp(spec.target_penalty));
    Index hits = 0;
    for (Index i = 0; i < K; ++i)
        for (Index j = 0; j < K; ++j) {
            const auto [x, y] = end_effector(spec.l1, spec.l2, joint_angle(i, K), joint_angle(j, K));
            if (spec.target.contains(x, y)) {
                target[id(i, j)] = 1.0;
                ++hits;
            }
        }
    if (hits == 0) throw Error(ErrorCode::EmptyTarget, "target region contains no configuration");

    const Matrix Q = default_subtask_rewards(n, spec.basis_penalty * spec.lambda, spec.lambda);
    return {*lmdp, build_task_basis(lmdp, Q), target, spec};
}

} // namespace lmdp
