#include "lmdp/solve.hpp"
#include "lmdp/error.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace lmdp {

namespace {

constexpr Index kDenseCutoff = 64;

SparseMatrix bellman_operator(const SparseMatrix& P_i, const Vector& q_i) {
    SparseMatrix A = SparseMatrix(P_i.transpose());
    A = q_i.asDiagonal() * A;
    A.makeCompressed();
    return A;
}

} // namespace

struct LinearSolver::Impl {
    SparseMatrix A; // I - M_i P_i^T
    Vector q_i;
    bool dense = false;
    Eigen::PartialPivLU<Matrix> dense_lu;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> sparse_lu;

    Matrix raw(const Matrix& rhs) const {
        if (dense) return dense_lu.solve(rhs);
        Matrix out(rhs.rows(), rhs.cols());
        for (Index c = 0; c < rhs.cols(); ++c) out.col(c) = sparse_lu.solve(rhs.col(c));
        return out;
    }
};

LinearSolver::LinearSolver(const SparseMatrix& P_i, const Vector& q_i)
    : impl_(std::make_unique<Impl>()), n_(P_i.rows()) {
    if (P_i.rows() != P_i.cols() || q_i.size() != P_i.rows())
        throw Error(ErrorCode::DimensionMismatch, "solver blocks disagree");
    SparseMatrix I(n_, n_);
    I.setIdentity();
    impl_->A = I - bellman_operator(P_i, q_i);
    impl_->A.makeCompressed();
    impl_->q_i = q_i;
    impl_->dense = n_ < kDenseCutoff;
    if (impl_->dense) {
        impl_->dense_lu.compute(Matrix(impl_->A));
        const auto d = impl_->dense_lu.matrixLU().diagonal().cwiseAbs();
        if (!(d.minCoeff() > 1e-14 * std::max(1.0, d.maxCoeff())))
            throw Error(ErrorCode::SingularSystem, "I - M_i P_i^T is singular");
    } else {
        impl_->sparse_lu.compute(impl_->A);
        if (impl_->sparse_lu.info() != Eigen::Success)
            throw Error(ErrorCode::SingularSystem, "sparse LU failed: " + impl_->sparse_lu.lastErrorMessage());
    }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

bool LinearSolver::dense() const { return impl_->dense; }

Matrix LinearSolver::solve_rhs(const Matrix& rhs) const {
    Matrix x = impl_->raw(rhs);
    // one refinement step
    const Matrix r = rhs - impl_->A * x;
    x += impl_->raw(r);
    if (!x.allFinite()) throw Error(ErrorCode::SingularSystem, "non-finite solution");
    return x;
}

Vector LinearSolver::solve(const SparseMatrix& P_b, const Vector& z_b) const {
    if (P_b.cols() != n_ || P_b.rows() != z_b.size())
        throw Error(ErrorCode::DimensionMismatch, "P_b and z_b disagree");
    const Vector rhs = impl_->q_i.cwiseProduct(P_b.transpose() * z_b);
    return solve_rhs(rhs);
}

Matrix LinearSolver::solve(const SparseMatrix& P_b, const Matrix& Z_b) const {
    if (P_b.cols() != n_ || P_b.rows() != Z_b.rows())
        throw Error(ErrorCode::DimensionMismatch, "P_b and Z_b disagree");
    Matrix out(n_, Z_b.cols());
    for (Index c = 0; c < Z_b.cols(); ++c) out.col(c) = solve(P_b, Vector(Z_b.col(c)));
    return out;
}

double LinearSolver::residual(const SparseMatrix& P_b, const Vector& z_i, const Vector& z_b) const {
    const Vector rhs = impl_->q_i.cwiseProduct(P_b.transpose() * z_b);
    return (impl_->A * z_i - rhs).cwiseAbs().maxCoeff();
}

double bellman_residual(const SparseMatrix& P_i, const SparseMatrix& P_b, const Vector& q_i,
                        const Vector& z_i, const Vector& z_b) {
    const Vector Tz = q_i.cwiseProduct(P_i.transpose() * z_i + P_b.transpose() * z_b);
    return (z_i - Tz).cwiseAbs().maxCoeff();
}

double bellman_residual(const Lmdp& lmdp, const Desirability& z) {
    return bellman_residual(lmdp.P_i(), lmdp.P_b(), lmdp.q_i(), z.z_i, z.z_b);
}

Vector solve_direct(const SparseMatrix& P_i, const SparseMatrix& P_b, const Vector& q_i,
                    const Vector& z_b) {
    LinearSolver solver(P_i, q_i);
    return solver.solve(P_b, z_b);
}

Desirability solve_direct(const Lmdp& lmdp) {
    LinearSolver solver(lmdp.P_i(), lmdp.q_i());
    Desirability z{solver.solve(lmdp.P_b(), lmdp.q_b()), lmdp.q_b()};
    const double res = solver.residual(lmdp.P_b(), z.z_i, z.z_b);
    if (res > 1e-10 * (1.0 + z.z_i.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::SingularSystem, "residual " + std::to_string(res) + " above bound");
    if (!(z.z_i.minCoeff() > 0.0))
        throw Error(ErrorCode::SingularSystem, "non-positive desirability; system is unstable");
    return z;
}

ZIterationResult z_iterate(const SparseMatrix& P_i, const SparseMatrix& P_b, const Vector& q_i,
                           const Vector& z_b, const ZIterationOptions& options) {
    if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "tol must be positive");
    const Index n = P_i.rows();
    const SparseMatrix A = bellman_operator(P_i, q_i);
    const Vector c = q_i.cwiseProduct(P_b.transpose() * z_b);

    Vector z = options.init.size() == n ? options.init : Vector(Vector::Zero(n));
    Vector zn(n);

    std::vector<Index> window = options.window;
    if (window.empty()) {
        window.resize(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) window[static_cast<std::size_t>(k)] = k;
    }

    ZIterationResult out;
    while (out.iterations < options.max_iter) {
        zn.noalias() = A * z;
        zn += c;
        ++out.iterations;
        if (options.observer) options.observer(zn);

        double change = 0.0;
        bool ready = true;
        for (Index k : window) {
            const double d = std::abs(zn[k] - z[k]);
            if (options.relative) {
                if (!(zn[k] > 0.0)) {
                    ready = false;
                    break;
                }
                change = std::max(change, d / zn[k]);
            } else {
                change = std::max(change, d);
            }
        }
        z.swap(zn);
        out.last_change = change;
        if (ready && change <= options.tol) {
            out.converged = true;
            break;
        }
    }
    out.z = {std::move(z), z_b};
    return out;
}

ZIterationResult solve_z_iteration(const Lmdp& lmdp, const ZIterationOptions& options) {
    return z_iterate(lmdp.P_i(), lmdp.P_b(), lmdp.q_i(), lmdp.q_b(), options);
}

ZIterationResult solve_z_iteration(const Lmdp& lmdp, double tol, Index max_iter) {
    ZIterationOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    return solve_z_iteration(lmdp, options);
}

std::vector<std::pair<Index, double>> policy_column(const SparseMatrix& P_i,
                                                    const SparseMatrix& P_b, const Vector& z_i,
                                                    const Vector& z_b, Index s) {
    std::vector<std::pair<Index, double>> col;
    double G = 0.0;
    for (SparseMatrix::InnerIterator it(P_i, s); it; ++it) {
        const double w = it.value() * z_i[it.row()];
        if (w > 0.0) {
            col.emplace_back(it.row(), w);
            G += w;
        }
    }
    const Index ni = P_i.rows();
    for (SparseMatrix::InnerIterator it(P_b, s); it; ++it) {
        const double w = it.value() * z_b[it.row()];
        if (w > 0.0) {
            col.emplace_back(ni + it.row(), w);
            G += w;
        }
    }
    if (!(G > 0.0))
        throw Error(ErrorCode::ZeroNormalizer, "G[z] vanishes at state " + std::to_string(s));
    for (auto& e : col) e.second /= G;
    return col;
}

PolicyMatrix optimal_policy(const Lmdp& lmdp, const Desirability& z) {
    if (z.z_i.size() != lmdp.n_interior() || z.z_b.size() != lmdp.n_boundary())
        throw Error(ErrorCode::DimensionMismatch, "desirability does not match the LMDP");
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(lmdp.P_i().nonZeros() + lmdp.P_b().nonZeros()));
    for (Index s = 0; s < lmdp.n_interior(); ++s)
        for (const auto& [row, p] : policy_column(lmdp.P_i(), lmdp.P_b(), z.z_i, z.z_b, s))
            trip.emplace_back(row, s, p);
    PolicyMatrix a(lmdp.size(), lmdp.n_interior());
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    return a;
}

Vector value_from_desirability(const Desirability& z, double lambda) {
    Vector all(z.z_i.size() + z.z_b.size());
    all << z.z_i, z.z_b;
    if (!(all.size() == 0 || all.minCoeff() > 0.0))
        throw Error(ErrorCode::NonPositiveDesirability, "log of a non-positive desirability");
    return lambda * all.array().log().matrix();
}

double episode_return(const std::vector<Index>& trajectory, const PolicyMatrix& policy,
                      const Lmdp& lmdp) {
    const Index ni = lmdp.n_interior();
    if (trajectory.empty() || trajectory.back() < ni || trajectory.back() >= lmdp.size())
        throw Error(ErrorCode::InvalidTrajectory, "trajectory must end at a boundary state");
    const double lambda = lmdp.lambda();
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
        const Index s = trajectory[t];
        if (s < 0 || s >= ni)
            throw Error(ErrorCode::InvalidTrajectory, "boundary state before the end of the trajectory");
        const Index next = trajectory[t + 1];
        double kl = 0.0;
        double a_next = 0.0;
        for (SparseMatrix::InnerIterator it(policy, s); it; ++it) {
            const double a = it.value();
            if (it.row() == next) a_next = a;
            if (a <= 0.0) continue;
            const double p = it.row() < ni ? lmdp.P_i().coeff(it.row(), s)
                                           : lmdp.P_b().coeff(it.row() - ni, s);
            if (!(p > 0.0))
                throw Error(ErrorCode::InvalidTrajectory, "policy leaves the passive support");
            kl += a * std::log(a / p);
        }
        if (!(a_next > 0.0))
            throw Error(ErrorCode::InvalidTrajectory,
                        "zero-probability transition at step " + std::to_string(t));
        total += lmdp.rewards().r_i[s] - lambda * kl;
    }
    return total + lmdp.rewards().r_b[trajectory.back() - ni];
}

Index sample_from(const std::vector<std::pair<Index, double>>& column, Rng& rng) {
    const double u = uniform01(rng);
    double cum = 0.0;
    for (const auto& [idx, p] : column) {
        cum += p;
        if (u < cum) return idx;
    }
    return column.back().first;
}

Index sample_transition(const PolicyMatrix& policy, Index s, Rng& rng) {
    const double u = uniform01(rng);
    double cum = 0.0;
    Index last = -1;
    for (PolicyMatrix::InnerIterator it(policy, s); it; ++it) {
        if (it.value() <= 0.0) continue;
        cum += it.value();
        last = it.row();
        if (u < cum) return it.row();
    }
    if (last < 0) throw Error(ErrorCode::ZeroNormalizer, "empty policy column");
    return last;
}

std::vector<Index> rollout(const PolicyMatrix& policy, Index n_interior, Index s0, Rng& rng,
                           Index max_steps) {
    std::vector<Index> states{s0};
    Index s = s0;
    for (Index t = 0; t < max_steps && s < n_interior; ++t) {
        s = sample_transition(policy, s, rng);
        states.push_back(s);
    }
    return states;
}

} // namespace lmdp
