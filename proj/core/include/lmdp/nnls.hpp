#pragma once

#include "lmdp/types.hpp"

namespace lmdp {

struct NnlsResult {
    Vector x;
    double residual = 0.0; ///< ||A x - b||_2
    Index iterations = 0;
    bool converged = false;
};

/// min ||A x - b||_2 subject to x >= 0. Lawson-Hanson active-set method; passive-set
/// subproblems are solved on the Gram matrix. Stops when the dual is <= dual_tol.
NnlsResult nnls(const Matrix& A, const Vector& b, double dual_tol = 1e-12, Index max_iter = 0);

/// max(A^+ b, 0) with the minimum-norm least-squares pseudoinverse.
NnlsResult pinv_clip(const Matrix& A, const Vector& b);

} // namespace lmdp
