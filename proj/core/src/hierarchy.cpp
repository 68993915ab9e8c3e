#include "lmdp/hierarchy.hpp"
#include "lmdp/error.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace lmdp {

Matrix default_subtask_rewards(Index n_subtasks, double penalty, double lambda) {
    if (n_subtasks < 1) throw Error(ErrorCode::InvalidSpec, "need at least one subtask");
    if (!(penalty < 0.0)) throw Error(ErrorCode::InvalidSpec, "subtask penalty must be negative");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidSpec, "lambda must be positive");
    Matrix Q = Matrix::Constant(n_subtasks, n_subtasks, std::exp(penalty / lambda));
    Q.diagonal().setOnes();
    return Q;
}

AugmentedMlmdp augment(const Mlmdp& mlmdp, const SubtaskStructure& subtasks, double penalty,
                       const std::optional<Matrix>& Q_t) {
    const Lmdp& L = *mlmdp.lmdp;
    const Index ni = L.n_interior();
    const Index nb = L.n_boundary();
    const Index nt = subtasks.P_t.rows();
    if (subtasks.P_t.cols() != ni)
        throw Error(ErrorCode::DimensionMismatch, "P_t must have N_i columns");
    if (nt < 1) throw Error(ErrorCode::DimensionMismatch, "P_t must have at least one row");
    if (mlmdp.Q_b.rows() != nb)
        throw Error(ErrorCode::DimensionMismatch, "Q_b must have N_b rows");

    AugmentedMlmdp aug;
    aug.layer = mlmdp.lmdp;
    aug.P_t = subtasks.P_t;
    aug.P_t.makeCompressed();

    Vector mass = Vector::Ones(ni);
    std::vector<char> reached(static_cast<std::size_t>(nt), 0);
    for (Index s = 0; s < ni; ++s) {
        for (SparseMatrix::InnerIterator it(aug.P_t, s); it; ++it) {
            if (!(it.value() >= 0.0) || !std::isfinite(it.value()))
                throw Error(ErrorCode::InvalidSpec, "P_t entries must be finite and nonnegative");
            mass[s] += it.value();
            if (it.value() > 0.0) reached[static_cast<std::size_t>(it.row())] = 1;
        }
    }
    for (Index k = 0; k < nt; ++k)
        if (!reached[static_cast<std::size_t>(k)])
            aug.warnings.push_back("Unreachable: subtask " + std::to_string(k) + " has no entry mass");
    // Base columns sum to one, so a zero total cannot arise from a valid layer.
    if (!(mass.minCoeff() > 0.0)) throw Error(ErrorCode::AllZeroColumn, "column with zero mass");

    const Vector inv = mass.cwiseInverse();
    SparseMatrix Pi = L.P_i() * inv.asDiagonal();
    aug.Pt_b = L.P_b() * inv.asDiagonal();
    aug.Pt_t = aug.P_t * inv.asDiagonal();
    Pi.makeCompressed();
    aug.Pt_b.makeCompressed();
    aug.Pt_t.makeCompressed();

    std::vector<Triplet> trip;
    for (Index s = 0; s < ni; ++s) {
        for (SparseMatrix::InnerIterator it(aug.Pt_b, s); it; ++it) trip.emplace_back(it.row(), s, it.value());
        for (SparseMatrix::InnerIterator it(aug.Pt_t, s); it; ++it) trip.emplace_back(nb + it.row(), s, it.value());
    }
    SparseMatrix Pb(nb + nt, ni);
    Pb.setFromTriplets(trip.begin(), trip.end());

    aug.labels = subtasks.labels;
    if (static_cast<Index>(aug.labels.size()) != nt) {
        aug.labels.clear();
        for (Index k = 0; k < nt; ++k) aug.labels.push_back("t" + std::to_string(k));
    }
    StatePartition part{ni, nb + nt, {}};
    if (!L.partition().labels.empty()) {
        part.labels = L.partition().labels;
        part.labels.insert(part.labels.end(), aug.labels.begin(), aug.labels.end());
    }
    Vector r_b(nb + nt);
    r_b << L.rewards().r_b, Vector::Zero(nt);
    aug.augmented = std::make_shared<const Lmdp>(
        build_lmdp(std::move(part), {std::move(Pi), std::move(Pb)}, {L.rewards().r_i, r_b, L.lambda()}));

    aug.Q_b = mlmdp.Q_b;
    aug.Q_t = Q_t ? *Q_t : default_subtask_rewards(nt, penalty, L.lambda());
    if (aug.Q_t.rows() != nt)
        throw Error(ErrorCode::DimensionMismatch, "Q_t must have N_t rows");
    aug.fill = std::exp(penalty / L.lambda());

    const Index ntb = aug.Q_b.cols();
    Matrix joint = Matrix::Constant(nb + nt, ntb + aug.Q_t.cols(), aug.fill);
    joint.topLeftCorner(nb, ntb) = aug.Q_b;
    joint.bottomRightCorner(nt, aug.Q_t.cols()) = aug.Q_t;
    aug.basis = build_task_basis(aug.augmented, joint);

    Matrix closed = Matrix::Zero(nb + nt, ntb);
    closed.topRows(nb) = aug.Q_b;
    aug.Z_closed = aug.basis.solver->solve(aug.augmented->P_b(), closed);
    return aug;
}

HigherDynamics derive_higher_layer(const AugmentedMlmdp& aug) {
    const Index ni = aug.n_interior();
    const Index nt = aug.n_subtasks();

    Matrix S = Matrix(aug.Pt_t.transpose());
    for (Index k = 0; k < nt; ++k) {
        const double total = S.col(k).sum();
        if (!(total > 0.0))
            throw Error(ErrorCode::InvalidSpec, "subtask " + std::to_string(k) + " is unreachable");
        S.col(k) /= total;
    }

    SparseMatrix I(ni, ni);
    I.setIdentity();
    SparseMatrix F = I - aug.augmented->P_i();
    F.makeCompressed();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(F);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorCode::SingularFundamentalMatrix, "I - P~_i is singular");
    Matrix X(ni, nt);
    for (Index k = 0; k < nt; ++k) {
        Vector x = lu.solve(S.col(k));
        x += lu.solve(Vector(S.col(k) - F * x));
        X.col(k) = x;
    }
    if (!X.allFinite()) throw Error(ErrorCode::SingularFundamentalMatrix, "non-finite fundamental matrix");

    Matrix Pi = (aug.Pt_t * X).cwiseMax(0.0);
    Matrix Pb = (aug.Pt_b * X).cwiseMax(0.0);
    return {Pi.sparseView(0.0, 0.0), Pb.sparseView(0.0, 0.0)};
}

Vector inpaint_rewards(const Vector& a, const Vector& p, double kappa) {
    if (a.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "a and p differ in length");
    return kappa * (a - p);
}

HierarchyStack::HierarchyStack(std::vector<std::shared_ptr<const LayerModel>> layers, Vector goal,
                               StackOptions options)
    : models_(std::move(layers)), states_(models_.size()), options_(options) {
    if (models_.empty()) throw Error(ErrorCode::InvalidSpec, "empty stack");
    set_goal(goal);
}

double HierarchyStack::kappa() const { return options_.kappa.value_or(models_.front()->lmdp->lambda()); }

void HierarchyStack::set_goal(const Vector& q_b) {
    if (q_b.size() != models_.front()->lmdp->n_boundary())
        throw Error(ErrorCode::DimensionMismatch, "goal must have N_b entries");
    goal_ = q_b;
    reset();
}

void HierarchyStack::reset() {
    for (std::size_t l = 0; l < models_.size(); ++l) {
        LayerState& st = states_[l];
        st.terminated = false;
        st.subtasks_live = models_[l]->augmented();
        st.q_t = models_[l]->augmented() ? Vector(Vector::Ones(models_[l]->aug->n_subtasks())) : Vector();
    }
    for (Index l = 0; l < depth(); ++l) blend(l);
}

void HierarchyStack::blend(Index l) {
    const LayerModel& m = model(l);
    LayerState& st = states_[static_cast<std::size_t>(l)];
    if (!m.augmented()) {
        auto sol = solve_novel_task(*m.top_basis, goal_, options_.method);
        st.weights = std::move(sol.weights);
        st.z = std::move(sol.z);
        return;
    }
    const AugmentedMlmdp& aug = *m.aug;
    if (st.subtasks_live) {
        Vector target(goal_.size() + st.q_t.size());
        target << goal_, st.q_t;
        auto sol = solve_novel_task(aug.basis, target, options_.method);
        st.weights = std::move(sol.weights);
        st.z = std::move(sol.z);
        return;
    }
    const NnlsResult r = options_.method == BlendMethod::Nnls ? nnls(aug.Q_b, goal_)
                                                              : pinv_clip(aug.Q_b, goal_);
    st.weights = {r.x, r.residual};
    st.z.z_i = aug.Z_closed * r.x;
    st.z.z_b = Vector::Zero(aug.n_boundary() + aug.n_subtasks());
    st.z.z_b.head(aug.n_boundary()) = aug.Q_b * r.x;
    if (!(st.z.z_i.minCoeff() > 0.0) || !(st.z.z_b.head(aug.n_boundary()).maxCoeff() > 0.0))
        throw Error(ErrorCode::NonPositiveComposite, "closed composite is not positive");
}

void HierarchyStack::rewards_to_task_weights(Index l, const Vector& r_t) {
    const LayerModel& m = model(l);
    if (!m.augmented()) throw Error(ErrorCode::InvalidSpec, "top layer has no subtasks");
    if (r_t.size() != m.aug->n_subtasks())
        throw Error(ErrorCode::DimensionMismatch, "r_t must have N_t entries");
    const double lambda = m.lmdp->lambda();
    const double hi = std::log(std::numeric_limits<double>::max());
    Vector q(r_t.size());
    for (Index k = 0; k < r_t.size(); ++k) {
        if (!(r_t[k] / lambda < hi)) throw Error(ErrorCode::Overflow, "inpainted reward overflows");
        q[k] = std::exp(r_t[k] / lambda);
    }
    states_[static_cast<std::size_t>(l)].q_t = std::move(q);
    blend(l);
}

void HierarchyStack::terminate_layer(Index l) {
    if (l == 0) throw Error(ErrorCode::CannotTerminateBase, "the base layer cannot be terminated");
    if (l < 0 || l >= depth()) throw Error(ErrorCode::InvalidSpec, "no layer " + std::to_string(l));
    LayerState& st = states_[static_cast<std::size_t>(l)];
    if (st.terminated) throw Error(ErrorCode::AlreadyTerminated, "layer " + std::to_string(l));
    st.terminated = true;
    states_[static_cast<std::size_t>(l - 1)].subtasks_live = false;
    blend(l - 1);
}

Vector HierarchyStack::composite_interior(Index l, const Vector* override, Index goal_column) const {
    const LayerState& st = state(l);
    if (override == nullptr) return st.z.z_i;
    const LayerModel& m = model(l);
    const Matrix& Z = !m.augmented() ? m.top_basis->Z_i
                      : st.subtasks_live ? m.aug->basis.Z_i
                                         : m.aug->Z_closed;
    if (override->size() != Z.rows() || goal_column < 0 || goal_column >= Z.cols())
        throw Error(ErrorCode::DimensionMismatch, "override does not match the layer");
    Vector out = st.weights.w[goal_column] * *override;
    for (Index k = 0; k < Z.cols(); ++k)
        if (k != goal_column && st.weights.w[k] != 0.0) out += st.weights.w[k] * Z.col(k);
    return out;
}

std::vector<std::pair<Index, double>> HierarchyStack::policy_column(Index l, Index s,
                                                                    const Vector* override,
                                                                    Index goal_column,
                                                                    bool drop_subtasks) const {
    const LayerModel& m = model(l);
    const Lmdp& dyn = m.dynamics();
    const LayerState& st = state(l);
    if (override == nullptr && !drop_subtasks)
        return lmdp::policy_column(dyn.P_i(), dyn.P_b(), st.z.z_i, st.z.z_b, s);
    Vector z_b = st.z.z_b;
    if (drop_subtasks && m.augmented()) z_b.tail(m.aug->n_subtasks()).setZero();
    if (override == nullptr) return lmdp::policy_column(dyn.P_i(), dyn.P_b(), st.z.z_i, z_b, s);
    return lmdp::policy_column(dyn.P_i(), dyn.P_b(), composite_interior(l, override, goal_column), z_b, s);
}

Vector HierarchyStack::inpaint_from(Index l, Index s) const {
    const Lmdp& dyn = model(l).dynamics();
    const Index ni = dyn.n_interior();
    Vector a = Vector::Zero(ni);
    for (const auto& [idx, p] : policy_column(l, s))
        if (idx < ni) a[idx] = p;
    Vector p = Vector::Zero(ni);
    for (SparseMatrix::InnerIterator it(dyn.P_i(), s); it; ++it) p[it.row()] = it.value();
    return inpaint_rewards(a, p, kappa());
}

HierarchyStack build_stack(const Mlmdp& base, const std::vector<SubtaskStructure>& levels,
                           const Vector& goal, const StackOptions& options,
                           const std::vector<Matrix>& higher_Q_b) {
    const double lambda = base.lmdp->lambda();
    std::vector<std::shared_ptr<const LayerModel>> models;
    Mlmdp cur = base;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        auto m = std::make_shared<LayerModel>();
        m->lmdp = cur.lmdp;
        m->Q_b = cur.Q_b;
        m->aug = std::make_shared<const AugmentedMlmdp>(augment(cur, levels[l], options.penalty * lambda));
        const HigherDynamics hd = derive_higher_layer(*m->aug);
        const Index nt = m->aug->n_subtasks();

        StatePartition part{nt, base.lmdp->n_boundary(), {}};
        if (!base.lmdp->partition().labels.empty()) {
            part.labels = m->aug->labels;
            const auto& bl = base.lmdp->partition().labels;
            part.labels.insert(part.labels.end(), bl.begin() + base.lmdp->n_interior(), bl.end());
        }
        RewardModel rew{Vector::Constant(nt, options.higher_interior_reward * lambda),
                        base.lmdp->rewards().r_b, lambda};
        cur.lmdp = std::make_shared<const Lmdp>(build_lmdp(std::move(part), {hd.P_i, hd.P_b}, std::move(rew)));
        cur.Q_b = l < higher_Q_b.size() ? higher_Q_b[l] : base.Q_b;
        models.push_back(std::move(m));
    }
    auto top = std::make_shared<LayerModel>();
    top->lmdp = cur.lmdp;
    top->Q_b = cur.Q_b;
    top->top_basis = std::make_shared<const TaskBasis>(build_task_basis(cur.lmdp, cur.Q_b));
    models.push_back(std::move(top));
    return HierarchyStack(std::move(models), goal, options);
}

} // namespace lmdp
