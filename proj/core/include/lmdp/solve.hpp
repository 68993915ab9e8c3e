#pragma once

#include "lmdp/lmdp.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace lmdp {

struct Desirability {
    Vector z_i;
    Vector z_b;
};

/// Factorization of (I - M_i P_i^T), reusable across right-hand sides.
/// Dense LU below 64 interior states, sparse LU otherwise.
class LinearSolver {
public:
    LinearSolver(const SparseMatrix& P_i, const Vector& q_i);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    /// Interior desirability for explicit boundary values z_b >= 0.
    Vector solve(const SparseMatrix& P_b, const Vector& z_b) const;
    /// Column-wise version of solve() for a matrix of boundary values.
    Matrix solve(const SparseMatrix& P_b, const Matrix& Z_b) const;
    /// Raw solve of (I - M_i P_i^T) x = rhs.
    Matrix solve_rhs(const Matrix& rhs) const;

    /// ||(I - M_i P_i^T) z - M_i P_b^T z_b||_inf.
    double residual(const SparseMatrix& P_b, const Vector& z_i, const Vector& z_b) const;

    Index size() const { return n_; }
    bool dense() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    Index n_ = 0;
};

Desirability solve_direct(const Lmdp& lmdp);

/// Direct solve with an explicit nonnegative boundary vector.
Vector solve_direct(const SparseMatrix& P_i, const SparseMatrix& P_b, const Vector& q_i,
                    const Vector& z_b);

/// Residual ||z_i - M_i P_i^T z_i - M_i P_b^T z_b||_inf of the linear Bellman equation.
double bellman_residual(const SparseMatrix& P_i, const SparseMatrix& P_b, const Vector& q_i,
                        const Vector& z_i, const Vector& z_b);
double bellman_residual(const Lmdp& lmdp, const Desirability& z);

struct ZIterationOptions {
    double tol = 1e-10;
    Index max_iter = 1000000;
    /// Starting iterate; empty means zero.
    Vector init;
    /// Stop on max |dz| / z over the window instead of the absolute change.
    bool relative = false;
    /// Entries checked for convergence; empty means all.
    std::vector<Index> window;
    /// Called with each new iterate, for monotonicity checks.
    std::function<void(const Vector&)> observer;
};

struct ZIterationResult {
    Desirability z;
    Index iterations = 0;
    bool converged = false;
    double last_change = 0.0;
};

ZIterationResult solve_z_iteration(const Lmdp& lmdp, double tol = 1e-10, Index max_iter = 1000000);
ZIterationResult solve_z_iteration(const Lmdp& lmdp, const ZIterationOptions& options);

/// Z-iteration on explicit blocks. Counts sweeps until the stopping test passes.
ZIterationResult z_iterate(const SparseMatrix& P_i, const SparseMatrix& P_b, const Vector& q_i,
                           const Vector& z_b, const ZIterationOptions& options);

/// N x N_i column-stochastic matrix; rows are interior states then boundary states.
using PolicyMatrix = SparseMatrix;

/// Normalized successor distribution of interior state s given z over [interior; boundary].
/// Entries are (global index, probability) in storage order.
std::vector<std::pair<Index, double>> policy_column(const SparseMatrix& P_i,
                                                    const SparseMatrix& P_b, const Vector& z_i,
                                                    const Vector& z_b, Index s);

PolicyMatrix optimal_policy(const Lmdp& lmdp, const Desirability& z);

/// V = lambda log z over interior then boundary states.
Vector value_from_desirability(const Desirability& z, double lambda);

/// Sum of R - lambda KL(a || P) along the trajectory plus the terminal boundary reward.
double episode_return(const std::vector<Index>& trajectory, const PolicyMatrix& policy,
                      const Lmdp& lmdp);

/// Draws an index from (index, probability) pairs. Probabilities must sum to one.
Index sample_from(const std::vector<std::pair<Index, double>>& column, Rng& rng);

Index sample_transition(const PolicyMatrix& policy, Index s, Rng& rng);

/// Rollout under a fixed policy until the boundary or max_steps transitions.
std::vector<Index> rollout(const PolicyMatrix& policy, Index n_interior, Index s0, Rng& rng,
                           Index max_steps);

} // namespace lmdp
