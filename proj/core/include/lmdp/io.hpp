#pragma once

#include "lmdp/executor.hpp"
#include "lmdp/scaling.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lmdp::io {

/// 17 significant digits, round-trip exact.
std::string format_double(double x);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

/// FNV-1a over the bytes of s.
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t x);

/// Fields n_interior, n_boundary, lambda, r_i, r_b, passive [[source, target, p], ...].
/// Targets are global state indices (boundary >= n_interior). Optional labels.
std::string lmdp_to_json(const Lmdp& lmdp);
Lmdp lmdp_from_json(const std::string& text);

/// LMDP document plus Q_b and Z_i as dense row-major arrays.
std::string basis_to_json(const TaskBasis& basis);
TaskBasis basis_from_json(const std::string& text);

/// state_index,label,z,V
std::string desirability_csv(const Lmdp& lmdp, const Desirability& z);
/// source,target,probability
std::string policy_csv(const PolicyMatrix& policy);
/// task_index,weight
std::string weights_csv(const TaskWeights& w);

/// One document per layer and a manifest naming them.
struct StackDocuments {
    std::string manifest;
    std::vector<std::string> layers;
};
StackDocuments stack_to_json(const HierarchyStack& stack);

/// t,state,layer_accessed,event
std::string trajectory_csv(const HierarchicalTrajectory& traj, const Lmdp& base);
/// event_id,layer,task_index,weight
std::string snapshots_csv(const HierarchicalTrajectory& traj);

/// N,condition,total_iterations,nonzeros
std::string scaling_csv(const std::vector<ScalingRow>& rows);

} // namespace lmdp::io
