#pragma once

#include "lmdp/nnls.hpp"
#include "lmdp/solve.hpp"

#include <memory>
#include <string>

namespace lmdp {

enum class BlendMethod { Nnls, PseudoinverseClip };

BlendMethod parse_blend_method(const std::string& name);
const char* to_string(BlendMethod method) noexcept;

/// Solved task basis sharing one LMDP. Boundary rewards of the LMDP are ignored.
struct TaskBasis {
    std::shared_ptr<const Lmdp> lmdp;
    std::shared_ptr<const LinearSolver> solver;
    Matrix Q_b; ///< N_b x N_t, strictly positive
    Matrix Z_i; ///< N_i x N_t

    Index n_tasks() const { return Q_b.cols(); }
};

struct TaskWeights {
    Vector w;
    double residual = 0.0;
};

/// Solves every column of Q_b against the shared dynamics.
TaskBasis build_task_basis(const Lmdp& base, const Matrix& Q_b);
TaskBasis build_task_basis(std::shared_ptr<const Lmdp> base, const Matrix& Q_b);

TaskWeights blend_weights(const TaskBasis& basis, const Vector& q_target,
                          BlendMethod method = BlendMethod::Nnls);

Desirability compose_desirability(const TaskBasis& basis, const TaskWeights& w);

struct NovelTaskSolution {
    Desirability z;
    TaskWeights weights;
};

NovelTaskSolution solve_novel_task(const TaskBasis& basis, const Vector& q_target,
                                   BlendMethod method = BlendMethod::Nnls);

} // namespace lmdp
