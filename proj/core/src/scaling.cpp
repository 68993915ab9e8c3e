#include "lmdp/scaling.hpp"
#include "lmdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace lmdp {

namespace {

RingSpec ring_spec(Index n, const ScalingOptions& o) {
    RingSpec s;
    s.n_states = n;
    s.exit_prob = o.exit_prob;
    s.interior_reward = o.interior_reward;
    s.subtask_weight = o.subtask_weight;
    s.spacing = o.spacing;
    return s;
}

Index iterate(const SparseMatrix& Pi, const SparseMatrix& Pb, const Vector& qi, const Vector& zb,
              std::vector<Index> window, const ScalingOptions& o, bool& converged) {
    ZIterationOptions zo;
    zo.tol = o.tol;
    zo.max_iter = o.max_iter;
    zo.relative = true;
    zo.window = std::move(window);
    const auto r = z_iterate(Pi, Pb, qi, zb, zo);
    converged = converged && r.converged;
    return r.iterations;
}

std::vector<Index> all_states(Index n) {
    std::vector<Index> w(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = k;
    return w;
}

} // namespace

std::vector<Index> reverse_window(const SparseMatrix& P, Index target, const std::vector<char>& stop) {
    const Index n = P.cols();
    std::vector<std::vector<Index>> pred(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s)
        for (SparseMatrix::InnerIterator it(P, s); it; ++it)
            if (it.value() > 0.0) pred[static_cast<std::size_t>(it.row())].push_back(s);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::deque<Index> queue{target};
    seen[static_cast<std::size_t>(target)] = 1;
    while (!queue.empty()) {
        const Index u = queue.front();
        queue.pop_front();
        if (u != target && stop[static_cast<std::size_t>(u)]) continue;
        for (Index s : pred[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(s)]) {
                seen[static_cast<std::size_t>(s)] = 1;
                queue.push_back(s);
            }
        }
    }
    std::vector<Index> out;
    for (Index s = 0; s < n; ++s)
        if (seen[static_cast<std::size_t>(s)]) out.push_back(s);
    return out;
}

ScalingRow flat_scaling(Index n_states, const ScalingOptions& o) {
    const RingDomain ring = make_ring(ring_spec(n_states, o));
    const Lmdp& L = ring.lmdp;
    ScalingRow row{n_states, "flat", 0, 0, 1, ring.spacing, true};
    for (Index t = 0; t < n_states; ++t) {
        Vector zb = Vector::Zero(n_states);
        zb[t] = 1.0;
        row.total_iterations += iterate(L.P_i(), L.P_b(), L.q_i(), zb, all_states(n_states), o, row.converged);
        row.nonzeros += n_states;
    }
    return row;
}

ScalingRow hierarchical_scaling(Index n_states, const ScalingOptions& o) {
    const RingDomain ring = make_ring(ring_spec(n_states, o));
    const Index M = ring.spacing;
    const Index nb = n_states;
    ScalingRow row{n_states, "hierarchical", 0, 0, static_cast<Index>(ring.layer_sizes.size()), M, true};

    // Base twins covered by each interior state of the current layer.
    std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(n_states));
    for (Index s = 0; s < n_states; ++s) blocks[static_cast<std::size_t>(s)] = {s};

    auto lmdp = std::make_shared<const Lmdp>(ring.lmdp);
    for (std::size_t l = 0;; ++l) {
        const Index n = lmdp->n_interior();
        if (l == ring.levels.size()) {
            for (Index j = 0; j < n; ++j) {
                Vector zb = Vector::Zero(nb);
                for (Index b : blocks[static_cast<std::size_t>(j)]) zb[b] = 1.0;
                row.total_iterations += iterate(lmdp->P_i(), lmdp->P_b(), lmdp->q_i(), zb, all_states(n), o, row.converged);
                row.nonzeros += n;
            }
            return row;
        }
        const SubtaskStructure& st = ring.levels[l];
        const AugmentedMlmdp aug = augment(Mlmdp{lmdp, Matrix::Ones(nb, 1)}, st, -5.0 * lmdp->lambda());
        const Lmdp& A = *aug.augmented;
        const Index nt = aug.n_subtasks();

        std::vector<Index> cells(static_cast<std::size_t>(nt));
        std::vector<char> access(static_cast<std::size_t>(n), 0);
        for (Index s = 0; s < n; ++s) {
            for (SparseMatrix::InnerIterator it(st.P_t, s); it; ++it) {
                if (it.value() > 0.0) {
                    cells[static_cast<std::size_t>(it.row())] = s;
                    access[static_cast<std::size_t>(s)] = 1;
                }
            }
        }
        for (Index j = 0; j < n; ++j) {
            Vector zb = Vector::Zero(nb + nt);
            for (Index b : blocks[static_cast<std::size_t>(j)]) zb[b] = 1.0;
            auto win = reverse_window(A.P_i(), j, access);
            row.nonzeros += static_cast<Index>(win.size());
            row.total_iterations += iterate(A.P_i(), A.P_b(), A.q_i(), zb, std::move(win), o, row.converged);
        }
        for (Index k = 0; k < nt; ++k) {
            Vector zb = Vector::Zero(nb + nt);
            zb[nb + k] = 1.0;
            auto win = reverse_window(A.P_i(), cells[static_cast<std::size_t>(k)], access);
            row.nonzeros += static_cast<Index>(win.size());
            row.total_iterations += iterate(A.P_i(), A.P_b(), A.q_i(), zb, std::move(win), o, row.converged);
        }

        const HigherDynamics hd = derive_higher_layer(aug);
        std::vector<std::vector<Index>> next(static_cast<std::size_t>(nt));
        for (Index k = 0; k < nt; ++k) {
            const Index c = cells[static_cast<std::size_t>(k)];
            for (Index i = c; i < std::min(n, c + M); ++i) {
                const auto& b = blocks[static_cast<std::size_t>(i)];
                next[static_cast<std::size_t>(k)].insert(next[static_cast<std::size_t>(k)].end(), b.begin(), b.end());
            }
        }
        blocks = std::move(next);
        RewardModel rew{Vector::Constant(nt, o.higher_interior_reward * lmdp->lambda()), Vector::Zero(nb), lmdp->lambda()};
        lmdp = std::make_shared<const Lmdp>(build_lmdp({nt, nb, {}}, {hd.P_i, hd.P_b}, std::move(rew)));
    }
}

std::vector<ScalingRow> scaling_benchmark(const std::vector<Index>& sizes, const ScalingOptions& options) {
    std::vector<ScalingRow> rows;
    for (Index n : sizes) {
        if (n < 3) throw Error(ErrorCode::InvalidSpec, "ring sizes must be at least 3");
        rows.push_back(flat_scaling(n, options));
        rows.push_back(hierarchical_scaling(n, options));
    }
    return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::InvalidSpec, "slope needs at least two paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace lmdp
