#pragma once

#include "lmdp/hierarchy.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lmdp {

// ---------------------------------------------------------------- ring

struct RingSpec {
    Index n_states = 16;
    Index spacing = 0;         ///< 0 means ceil(ln N)
    Index depth = 0;           ///< 0 means recurse while a layer exceeds the spacing
    double exit_prob = 0.2;    ///< taken from the stay mass
    double interior_reward = -3.0;
    double lambda = 1.0;
    double subtask_weight = 1.0;
    double task_penalty = -5.0; ///< off-target boundary reward of the task set, units of lambda
    bool wrap = true;           ///< false gives a corridor
};

struct RingDomain {
    Lmdp lmdp;
    /// One subtask structure per augmented layer, bottom first.
    std::vector<SubtaskStructure> levels;
    /// Interior counts per layer, bottom first.
    std::vector<Index> layer_sizes;
    /// N x N task set; column t rewards exit through the twin of state t.
    Matrix tasks;
    Index spacing = 0;
};

/// ceil(ln N), at least 2.
Index default_spacing(Index n_states);
/// Layer interior counts produced by placing a subtask every M states recursively.
std::vector<Index> ring_layer_sizes(Index n_states, Index spacing, Index depth = 0);

RingDomain make_ring(const RingSpec& spec);
RingDomain make_corridor(RingSpec spec);

// ---------------------------------------------------------------- grid

using Cell = std::pair<Index, Index>; ///< (row, column)

struct GridSpec {
    Index width = 11;
    Index height = 11;
    std::set<Cell> walls;
    std::set<Cell> doors; ///< cleared from walls
    std::vector<Cell> goal_cells;
    double step_prob = 0.2; ///< per cardinal move; the rest stays
    double interior_reward = -1.0;
    double lambda = 1.0;
    double goal_penalty = -5.0; ///< off-goal entries of the goal task set, units of lambda

    bool blocked(const Cell& c) const;
    bool inside(const Cell& c) const;
};

struct GridDomain {
    Lmdp lmdp;
    SubtaskStructure subtasks;
    /// Goal task: q = 1 on every goal cell.
    Vector goal;
    /// One column per goal cell.
    Matrix Q_b;
    std::vector<Cell> interior_cells;
    std::vector<Cell> subtask_cells;
    GridSpec spec;

    /// Interior index of a free non-goal cell, or -1.
    Index index_of(const Cell& c) const;
};

/// Standard layout: walls through the middle row and column with one door per wall segment.
GridSpec four_rooms_spec(Index size = 11);
/// Doors plus four points per room.
std::vector<Cell> four_rooms_subtasks(const GridSpec& spec);

GridDomain make_four_rooms(const GridSpec& spec, const std::vector<Cell>& subtask_cells,
                           double subtask_weight = 1.0);

/// '#' wall, '.' free, 'G' goal, 'S' subtask (free). Rows separated by newlines.
struct ParsedGrid {
    GridSpec spec;
    std::vector<Cell> subtasks;
};
ParsedGrid parse_grid(const std::string& ascii);
std::string render_grid(const GridSpec& spec, const std::vector<Cell>& subtasks = {});

// ---------------------------------------------------------------- arm

struct Rect {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct ArmSpec {
    Index bins = 17;
    double l1 = 1.0;
    double l2 = 1.0;
    Rect target{0.5, 1.5, 0.5, 1.2};
    double exit_prob = 0.2;
    double interior_reward = -1.0;
    double lambda = 1.0;
    double target_penalty = -10.0; ///< outside the region, units of lambda
    double basis_penalty = -30.0;  ///< off-target entries of each reach task, units of lambda
};

struct ArmDomain {
    Lmdp lmdp;
    TaskBasis basis;
    Vector target_q;
    ArmSpec spec;
};

double joint_angle(Index bin, Index bins);
std::pair<double, double> end_effector(double l1, double l2, double a1, double a2);

ArmDomain make_arm(const ArmSpec& spec);

} // namespace lmdp
