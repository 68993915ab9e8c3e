#pragma once

#include <lmdp/domains.hpp>

#include <memory>
#include <string>
#include <vector>

namespace lmdp::cli {

/// Everything the commands need from a domain, resolved from a config document,
/// an ASCII map or a built-in name.
struct Problem {
    std::string kind; ///< ring, corridor, four-rooms, grid, arm, lmdp
    std::shared_ptr<const Lmdp> lmdp;
    Matrix Q_b;          ///< basis tasks over the boundary
    Vector goal;         ///< q_b of the task to solve, simulate and learn
    Index goal_column = 0;
    Vector blend_target; ///< q_b for the blend command
    std::vector<SubtaskStructure> levels;
    Index start = 0;
    StackOptions stack;
    double learn_init = 1e-6;
    double learn_c = 50.0;
    Index epochs = 10;
    Index episodes = 10;
    /// Shortest path length from start to a goal, when the domain defines one.
    Index shortest_path = -1;
    /// Canonical text of the resolved domain, hashed into the manifest.
    std::string canonical;
};

/// name is a built-in domain (ring, corridor, four-rooms, arm) or a path to a JSON
/// config / LMDP document or an ASCII grid map.
Problem load_problem(const std::string& name);

/// Breadth-first shortest path over free cells of a grid.
Index grid_shortest_path(const GridSpec& spec, const Cell& from);

} // namespace lmdp::cli
