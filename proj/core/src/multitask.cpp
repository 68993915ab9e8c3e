#include "lmdp/multitask.hpp"
#include "lmdp/error.hpp"

namespace lmdp {

BlendMethod parse_blend_method(const std::string& name) {
    if (name == "nnls" || name == "blend-nnls") return BlendMethod::Nnls;
    if (name == "pseudoinverse-clip" || name == "pinv" || name == "blend-pinv")
        return BlendMethod::PseudoinverseClip;
    throw Error(ErrorCode::InvalidSpec, "unknown blend method '" + name + "'");
}

const char* to_string(BlendMethod method) noexcept {
    return method == BlendMethod::Nnls ? "nnls" : "pseudoinverse-clip";
}

TaskBasis build_task_basis(std::shared_ptr<const Lmdp> base, const Matrix& Q_b) {
    if (Q_b.rows() != base->n_boundary())
        throw Error(ErrorCode::DimensionMismatch, "Q_b must have N_b rows");
    if (Q_b.size() > 0 && !(Q_b.minCoeff() > 0.0))
        throw Error(ErrorCode::DegenerateBasis, "Q_b must be strictly positive");
    TaskBasis basis;
    basis.solver = std::make_shared<LinearSolver>(base->P_i(), base->q_i());
    basis.Q_b = Q_b;
    try {
        basis.Z_i = basis.solver->solve(base->P_b(), Q_b);
    } catch (const Error& e) {
        throw Error(e.code(), std::string("task basis: ") + e.what());
    }
    for (Index t = 0; t < Q_b.cols(); ++t) {
        const double res = basis.solver->residual(base->P_b(), basis.Z_i.col(t), Q_b.col(t));
        if (res > 1e-10 * (1.0 + basis.Z_i.col(t).cwiseAbs().maxCoeff()))
            throw Error(ErrorCode::SingularSystem, "task " + std::to_string(t) + ": residual above bound");
        if (!(basis.Z_i.col(t).minCoeff() > 0.0))
            throw Error(ErrorCode::SingularSystem, "task " + std::to_string(t) + ": non-positive desirability");
    }
    basis.lmdp = std::move(base);
    return basis;
}

TaskBasis build_task_basis(const Lmdp& base, const Matrix& Q_b) {
    return build_task_basis(std::make_shared<const Lmdp>(base), Q_b);
}

TaskWeights blend_weights(const TaskBasis& basis, const Vector& q_target, BlendMethod method) {
    if (q_target.size() != basis.Q_b.rows())
        throw Error(ErrorCode::DimensionMismatch, "q_target must have N_b entries");
    if (!(q_target.minCoeff() >= 0.0) || !q_target.allFinite())
        throw Error(ErrorCode::InvalidSpec, "q_target must be finite and nonnegative");
    for (Index t = 0; t < basis.Q_b.cols(); ++t)
        if (basis.Q_b.col(t).cwiseAbs().maxCoeff() == 0.0)
            throw Error(ErrorCode::DegenerateBasis, "zero column " + std::to_string(t));
    const NnlsResult r = method == BlendMethod::Nnls ? nnls(basis.Q_b, q_target)
                                                     : pinv_clip(basis.Q_b, q_target);
    return {r.x, r.residual};
}

Desirability compose_desirability(const TaskBasis& basis, const TaskWeights& w) {
    if (w.w.size() != basis.n_tasks())
        throw Error(ErrorCode::DimensionMismatch, "weight vector must have N_t entries");
    Desirability z{basis.Z_i * w.w, basis.Q_b * w.w};
    if (!(z.z_i.minCoeff() > 0.0) || !(z.z_b.minCoeff() > 0.0))
        throw Error(ErrorCode::NonPositiveComposite, "composite desirability is not positive");
    return z;
}

NovelTaskSolution solve_novel_task(const TaskBasis& basis, const Vector& q_target,
                                   BlendMethod method) {
    TaskWeights w = blend_weights(basis, q_target, method);
    return {compose_desirability(basis, w), std::move(w)};
}

} // namespace lmdp
