#pragma once

#include "lmdp/multitask.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lmdp {

/// Interior -> subtask passive weights of one layer.
struct SubtaskStructure {
    SparseMatrix P_t; ///< N_t x N_i, entries >= 0
    std::vector<std::string> labels;

    Index n_subtasks() const { return P_t.rows(); }
};

/// Shared dynamics plus a boundary task set.
struct Mlmdp {
    std::shared_ptr<const Lmdp> lmdp;
    Matrix Q_b; ///< N_b x N_tb
};

/// Q_t with exp(0) on the diagonal and exp(penalty / lambda) elsewhere.
Matrix default_subtask_rewards(Index n_subtasks, double penalty, double lambda = 1.0);

/// An MLMDP whose state space gained absorbing subtask states.
/// The augmented LMDP treats subtask states as extra boundary states, rows [S_b; S_t].
struct AugmentedMlmdp {
    std::shared_ptr<const Lmdp> layer;     ///< original layer
    std::shared_ptr<const Lmdp> augmented; ///< P~_i and [P~_b; P~_t]
    SparseMatrix P_t;                      ///< weights as supplied
    SparseMatrix Pt_b;                     ///< P~_b
    SparseMatrix Pt_t;                     ///< P~_t
    Matrix Q_b;
    Matrix Q_t;
    double fill = 0.0; ///< off-block entry of the joint basis
    /// Columns [boundary tasks | subtask tasks] over rows [S_b; S_t].
    TaskBasis basis;
    /// Boundary tasks solved with every subtask state at q = 0.
    Matrix Z_closed;
    std::vector<std::string> labels;
    std::vector<std::string> warnings;

    Index n_interior() const { return layer->n_interior(); }
    Index n_boundary() const { return layer->n_boundary(); }
    Index n_subtasks() const { return P_t.rows(); }
    Index n_boundary_tasks() const { return Q_b.cols(); }
};

/// Stacks [P_i; P_b; P_t], renormalizes each column and solves the joint basis.
/// Q_t defaults to default_subtask_rewards(N_t, penalty).
AugmentedMlmdp augment(const Mlmdp& mlmdp, const SubtaskStructure& subtasks, double penalty,
                       const std::optional<Matrix>& Q_t = std::nullopt);

struct HigherDynamics {
    SparseMatrix P_i; ///< N_t x N_t
    SparseMatrix P_b; ///< N_b x N_t
};

/// Absorption statistics between subtask states under the augmented passive dynamics.
HigherDynamics derive_higher_layer(const AugmentedMlmdp& aug);

/// kappa (a - p) over matching entries.
Vector inpaint_rewards(const Vector& a, const Vector& p, double kappa);

struct StackOptions {
    double penalty = -5.0;                 ///< subtask penalty, in units of lambda
    std::optional<double> kappa;           ///< defaults to lambda
    double higher_interior_reward = -1.0;  ///< per step, in units of lambda
    BlendMethod method = BlendMethod::Nnls;
};

/// Immutable part of one layer.
struct LayerModel {
    std::shared_ptr<const Lmdp> lmdp;            ///< layer LMDP without subtasks
    std::shared_ptr<const AugmentedMlmdp> aug;   ///< null at the top
    std::shared_ptr<const TaskBasis> top_basis;  ///< set only at the top
    Matrix Q_b;

    bool augmented() const { return aug != nullptr; }
    /// Dynamics used for sampling: the augmented LMDP when present.
    const Lmdp& dynamics() const { return aug ? *aug->augmented : *lmdp; }
};

/// Mutable per-episode state of one layer.
struct LayerState {
    Vector q_t;          ///< current subtask target
    TaskWeights weights; ///< over the joint basis, or over Q_b once subtasks are closed
    Desirability z;      ///< composite; z_b spans the rows of dynamics()
    bool terminated = false;
    bool subtasks_live = true;
};

class HierarchyStack {
public:
    HierarchyStack(std::vector<std::shared_ptr<const LayerModel>> layers, Vector goal,
                   StackOptions options);

    Index depth() const { return static_cast<Index>(models_.size()); }
    const LayerModel& model(Index l) const { return *models_.at(static_cast<std::size_t>(l)); }
    const LayerState& state(Index l) const { return states_.at(static_cast<std::size_t>(l)); }
    const StackOptions& options() const { return options_; }
    double kappa() const;
    const Vector& goal() const { return goal_; }

    /// New goal over the base boundary states; resets every layer.
    void set_goal(const Vector& q_b);
    /// Live subtasks with q_t = 1 everywhere, then blend each layer.
    void reset();

    /// q_t = exp(r_t / lambda) at layer l, then re-blend (subtasks must be live).
    void rewards_to_task_weights(Index l, const Vector& r_t);
    void terminate_layer(Index l);

    /// Policy column of layer l at interior s from the current composite.
    /// When override is given at the base, it replaces column goal_column of Z_i.
    std::vector<std::pair<Index, double>> policy_column(Index l, Index s,
                                                        const Vector* override = nullptr,
                                                        Index goal_column = 0,
                                                        bool drop_subtasks = false) const;
    /// Interior composite of layer l, with the same override semantics.
    Vector composite_interior(Index l, const Vector* override = nullptr, Index goal_column = 0) const;

    /// r_t for layer l-1 from the policy of layer l at interior s.
    Vector inpaint_from(Index l, Index s) const;

private:
    void blend(Index l);

    std::vector<std::shared_ptr<const LayerModel>> models_;
    std::vector<LayerState> states_;
    Vector goal_;
    StackOptions options_;
};

/// Builds D = levels.size() + 1 layers. higher_Q_b optionally replaces the boundary task
/// set at layers 1..D-1; by default every layer reuses the base task set.
HierarchyStack build_stack(const Mlmdp& base, const std::vector<SubtaskStructure>& levels,
                           const Vector& goal, const StackOptions& options = {},
                           const std::vector<Matrix>& higher_Q_b = {});

} // namespace lmdp
