#pragma once

#include "lmdp/domains.hpp"

#include <string>
#include <vector>

namespace lmdp {

struct ScalingOptions {
    double tol = 1e-10;
    Index max_iter = 10000000;
    double interior_reward = -3.0;        ///< base layer, units of lambda
    double higher_interior_reward = -1.0; ///< layers above the base, units of lambda
    double exit_prob = 0.2;
    double subtask_weight = 1.0;
    Index spacing = 0; ///< 0 means ceil(ln N)
};

struct ScalingRow {
    Index n_states = 0;
    std::string condition; ///< "flat" or "hierarchical"
    Index total_iterations = 0;
    Index nonzeros = 0;
    Index depth = 1;
    Index spacing = 0;
    bool converged = true;
};

/// Flat condition: one goal-only z-iteration per ring state over all states.
ScalingRow flat_scaling(Index n_states, const ScalingOptions& options = {});

/// Hierarchical condition: per layer, one task per interior state plus one per subtask,
/// each iterated over the states that can reach its target without crossing another
/// subtask entry point.
ScalingRow hierarchical_scaling(Index n_states, const ScalingOptions& options = {});

std::vector<ScalingRow> scaling_benchmark(const std::vector<Index>& sizes,
                                          const ScalingOptions& options = {});

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// States that reach target through positive entries of P (column = source), not expanding
/// past any state in stop other than the target. Sorted.
std::vector<Index> reverse_window(const SparseMatrix& P, Index target, const std::vector<char>& stop);

} // namespace lmdp
