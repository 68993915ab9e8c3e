#include "lmdp/nnls.hpp"
#include "lmdp/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <vector>

namespace lmdp {

namespace {

// Unconstrained least squares restricted to the passive columns.
Vector passive_solve(const Matrix& G, const Vector& Atb, const std::vector<Index>& passive) {
    const Index k = static_cast<Index>(passive.size());
    Matrix Gp(k, k);
    Vector rhs(k);
    for (Index r = 0; r < k; ++r) {
        rhs[r] = Atb[passive[static_cast<std::size_t>(r)]];
        for (Index c = 0; c < k; ++c)
            Gp(r, c) = G(passive[static_cast<std::size_t>(r)], passive[static_cast<std::size_t>(c)]);
    }
    if (k == 1) return Vector::Constant(1, rhs[0] / Gp(0, 0));
    Eigen::LDLT<Matrix> ldlt(Gp);
    Vector s = ldlt.solve(rhs);
    if (!s.allFinite() || ldlt.info() != Eigen::Success)
        s = Gp.completeOrthogonalDecomposition().solve(rhs);
    return s;
}

} // namespace

NnlsResult nnls(const Matrix& A, const Vector& b, double dual_tol, Index max_iter) {
    if (A.rows() != b.size()) throw Error(ErrorCode::DimensionMismatch, "A and b disagree");
    const Index n = A.cols();
    if (max_iter <= 0) max_iter = 30 * std::max<Index>(n, 1);

    const Matrix G = A.transpose() * A;
    const Vector Atb = A.transpose() * b;
    const double scale = std::max(1.0, Atb.cwiseAbs().maxCoeff());

    NnlsResult out;
    out.x = Vector::Zero(n);
    std::vector<char> in_passive(static_cast<std::size_t>(n), 0);

    auto passive_list = [&] {
        std::vector<Index> p;
        for (Index j = 0; j < n; ++j)
            if (in_passive[static_cast<std::size_t>(j)]) p.push_back(j);
        return p;
    };

    while (out.iterations < max_iter) {
        const Vector dual = Atb - G * out.x;
        Index best = -1;
        double best_val = dual_tol * scale;
        for (Index j = 0; j < n; ++j) {
            if (!in_passive[static_cast<std::size_t>(j)] && dual[j] > best_val) {
                best = j;
                best_val = dual[j];
            }
        }
        if (best < 0) {
            out.converged = true;
            break;
        }
        in_passive[static_cast<std::size_t>(best)] = 1;

        while (out.iterations < max_iter) {
            ++out.iterations;
            const auto passive = passive_list();
            const Vector s = passive_solve(G, Atb, passive);
            bool feasible = true;
            for (Index k = 0; k < s.size(); ++k) feasible = feasible && s[k] > 0.0;
            if (feasible) {
                out.x.setZero();
                for (std::size_t k = 0; k < passive.size(); ++k) out.x[passive[k]] = s[static_cast<Index>(k)];
                break;
            }
            double alpha = 1.0;
            Index blocking = -1;
            for (std::size_t k = 0; k < passive.size(); ++k) {
                const double sk = s[static_cast<Index>(k)];
                if (sk <= 0.0) {
                    const double xk = out.x[passive[k]];
                    const double a = xk / (xk - sk);
                    if (blocking < 0 || a < alpha) {
                        alpha = a;
                        blocking = passive[k];
                    }
                }
            }
            for (std::size_t k = 0; k < passive.size(); ++k) {
                const Index j = passive[k];
                out.x[j] += alpha * (s[static_cast<Index>(k)] - out.x[j]);
                if (out.x[j] <= 0.0 || j == blocking) {
                    out.x[j] = 0.0;
                    in_passive[static_cast<std::size_t>(j)] = 0;
                }
            }
        }
    }
    out.residual = (A * out.x - b).norm();
    return out;
}

NnlsResult pinv_clip(const Matrix& A, const Vector& b) {
    if (A.rows() != b.size()) throw Error(ErrorCode::DimensionMismatch, "A and b disagree");
    NnlsResult out;
    out.x = A.completeOrthogonalDecomposition().solve(b).cwiseMax(0.0);
    out.residual = (A * out.x - b).norm();
    out.converged = true;
    return out;
}

} // namespace lmdp
