#pragma once

#include "lmdp/types.hpp"

#include <string>
#include <vector>

namespace lmdp {

struct StatePartition {
    Index n_interior = 0;
    Index n_boundary = 0;
    /// Optional, either empty or one label per state (interior first).
    std::vector<std::string> labels;

    Index size() const { return n_interior + n_boundary; }
};

struct PassiveDynamics {
    SparseMatrix P_i; ///< N_i x N_i
    SparseMatrix P_b; ///< N_b x N_i
};

struct RewardModel {
    Vector r_i;
    Vector r_b;
    double lambda = 1.0;
};

/// A validated first-exit LMDP. Immutable once built.
class Lmdp {
public:
    const StatePartition& partition() const { return partition_; }
    const PassiveDynamics& passive() const { return passive_; }
    const RewardModel& rewards() const { return rewards_; }

    Index n_interior() const { return partition_.n_interior; }
    Index n_boundary() const { return partition_.n_boundary; }
    Index size() const { return partition_.size(); }
    double lambda() const { return rewards_.lambda; }

    const SparseMatrix& P_i() const { return passive_.P_i; }
    const SparseMatrix& P_b() const { return passive_.P_b; }
    const Vector& q_i() const { return q_i_; }
    const Vector& q_b() const { return q_b_; }

    /// Label of global state index s, or its number when no labels are set.
    std::string label(Index s) const;

    /// Copy with different boundary rewards. Dynamics are shared.
    Lmdp with_boundary_rewards(const Vector& r_b) const;

private:
    friend Lmdp build_lmdp(StatePartition, PassiveDynamics, RewardModel);

    StatePartition partition_;
    PassiveDynamics passive_;
    RewardModel rewards_;
    Vector q_i_;
    Vector q_b_;
};

/// Validates dimensions, column stochasticity and absorption.
Lmdp build_lmdp(StatePartition partition, PassiveDynamics passive, RewardModel rewards);

struct ExpRewards {
    Vector q_i;
    Vector q_b;
};

ExpRewards exponentiate_rewards(const RewardModel& rewards);

/// exp(r / lambda) with overflow and underflow checks.
Vector exponentiate(const Vector& r, double lambda);

/// Interior states with no passive path to the boundary.
std::vector<Index> unabsorbed_states(const SparseMatrix& P_i, const SparseMatrix& P_b);

/// Largest deviation of a stacked column sum from one.
double max_column_deviation(const SparseMatrix& P_i, const SparseMatrix& P_b);

} // namespace lmdp
