#pragma once

#include "lmdp/hierarchy.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lmdp {

struct AccessEvent {
    Index base_time = 0;
    Index layer_reached = 0;
    /// (layer, interior state) pairs in visiting order.
    std::vector<std::pair<Index, Index>> visited;
    /// Layer terminated during this access, or -1.
    Index terminated_layer = -1;
};

struct WeightSnapshot {
    Index event_id = 0; ///< 0 is the initial blend, k the k-th access
    Index layer = 0;
    Vector w;
    double residual = 0.0;
};

struct HierarchicalTrajectory {
    /// Base states as global indices of the base LMDP (boundary >= N_i).
    std::vector<Index> base_states;
    std::vector<AccessEvent> access_events;
    std::vector<WeightSnapshot> weight_snapshots;
    /// Sum of r_i - lambda KL over executed columns plus the terminal boundary reward.
    double total_return = 0.0;
    bool reached_boundary = false;
    bool max_steps_exceeded = false;

    Index steps() const { return static_cast<Index>(base_states.size()) - 1; }
};

struct ExecutorOptions {
    /// Zero means 100 N_i.
    Index max_steps = 0;
    /// Learned interior desirability replacing basis column goal_column at the base.
    const Vector* goal_override = nullptr;
    Index goal_column = 0;
    /// Called after each base transition with the behavior probability of that transition.
    std::function<void(Index s, Index next, double prob)> on_step;
    bool record_snapshots = true;
};

/// Runs one episode. The stack is reset first and mutated in place.
HierarchicalTrajectory run_episode(HierarchyStack& stack, Index s0, Rng& rng,
                                   const ExecutorOptions& options = {});

/// Current base interior composite.
Vector desirability_map(const HierarchyStack& stack, const Vector* goal_override = nullptr,
                        Index goal_column = 0);

} // namespace lmdp
