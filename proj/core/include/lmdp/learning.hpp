#pragma once

#include "lmdp/executor.hpp"

#include <optional>
#include <vector>

namespace lmdp {

struct LearningState {
    Vector z_hat;  ///< interior estimate, kept strictly positive
    Vector z_b;    ///< fixed boundary values q_b
    Vector visits; ///< per-state update counts
    double c = 50.0;
    Index epoch = 0;
    std::vector<double> curve;

    LearningState(Index n_interior, const Vector& q_b, double init = 1e-6, double c = 50.0);

    /// c / (c + visits(s)) for the next update at s.
    double next_alpha(Index s) const;
};

/// z(s) <- (1 - alpha) z(s) + alpha exp(r / lambda) z(s') * weight.
/// weight is the importance ratio P(s'|s) / b(s'|s) for off-policy samples, 1 on-policy.
void z_learning_step(LearningState& state, Index s, double r, Index s_next, double lambda,
                     double alpha, double weight = 1.0);

/// Same update with the harmonic step size; increments the visit count.
void z_learning_update(LearningState& state, Index s, double r, Index s_next, double lambda,
                       double weight = 1.0);

struct TrainOptions {
    Index epochs = 10;
    Index episodes_per_epoch = 10;
    Index start = 0;
    double init = 1e-6;
    double c = 50.0;
    Index max_steps = 0; ///< 0 means 100 N_i
    /// Basis column of the base layer that the learned estimate replaces.
    Index goal_column = 0;
};

struct TrainResult {
    std::vector<double> mean_length; ///< per epoch
    std::vector<double> stderr_length;
    LearningState state;
};

/// Z-learning from the start state. Without a stack the behavior policy comes from the
/// estimate alone; with a stack it is the executor's composite with the estimate in place
/// of the goal column. Both update through z_learning_update.
TrainResult train(const Lmdp& domain, const Vector& goal_q_b, HierarchyStack* stack,
                  const TrainOptions& options, std::uint64_t seed);

} // namespace lmdp
