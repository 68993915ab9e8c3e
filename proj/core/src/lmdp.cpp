#include "lmdp/lmdp.hpp"
#include "lmdp/error.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace lmdp {

namespace {

constexpr double kStochasticTol = 1e-9;

void check_entries(const SparseMatrix& m, const char* name) {
    for (Index c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (!(it.value() >= 0.0 && it.value() <= 1.0)) {
                throw Error(ErrorCode::NotStochastic,
                            std::string(name) + " entry outside [0, 1] in column " +
                                std::to_string(c));
            }
        }
    }
}

} // namespace

std::string Lmdp::label(Index s) const {
    if (static_cast<Index>(partition_.labels.size()) == size())
        return partition_.labels[static_cast<std::size_t>(s)];
    return std::to_string(s);
}

Lmdp Lmdp::with_boundary_rewards(const Vector& r_b) const {
    if (r_b.size() != n_boundary())
        throw Error(ErrorCode::DimensionMismatch, "r_b has wrong length");
    Lmdp out = *this;
    out.rewards_.r_b = r_b;
    out.q_b_ = exponentiate(r_b, rewards_.lambda);
    return out;
}

Vector exponentiate(const Vector& r, double lambda) {
    if (!(lambda > 0.0))
        throw Error(ErrorCode::InvalidSpec, "lambda must be positive");
    const double hi = std::log(std::numeric_limits<double>::max());
    Vector q(r.size());
    for (Index k = 0; k < r.size(); ++k) {
        const double x = r[k] / lambda;
        if (!(x < hi))
            throw Error(ErrorCode::Overflow, "exp(r/lambda) overflows at entry " + std::to_string(k));
        q[k] = std::exp(x);
        if (!(q[k] > 0.0))
            throw Error(ErrorCode::Overflow, "exp(r/lambda) underflows at entry " + std::to_string(k));
    }
    return q;
}

ExpRewards exponentiate_rewards(const RewardModel& rewards) {
    return {exponentiate(rewards.r_i, rewards.lambda), exponentiate(rewards.r_b, rewards.lambda)};
}

std::vector<Index> unabsorbed_states(const SparseMatrix& P_i, const SparseMatrix& P_b) {
    const Index n = P_i.cols();
    std::vector<std::vector<Index>> pred(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s)
        for (SparseMatrix::InnerIterator it(P_i, s); it; ++it)
            if (it.value() > 0.0) pred[static_cast<std::size_t>(it.row())].push_back(s);

    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    std::deque<Index> queue;
    for (Index s = 0; s < n; ++s) {
        for (SparseMatrix::InnerIterator it(P_b, s); it; ++it) {
            if (it.value() > 0.0) {
                ok[static_cast<std::size_t>(s)] = 1;
                queue.push_back(s);
                break;
            }
        }
    }
    while (!queue.empty()) {
        const Index u = queue.front();
        queue.pop_front();
        for (Index p : pred[static_cast<std::size_t>(u)]) {
            if (!ok[static_cast<std::size_t>(p)]) {
                ok[static_cast<std::size_t>(p)] = 1;
                queue.push_back(p);
            }
        }
    }
    std::vector<Index> bad;
    for (Index s = 0; s < n; ++s)
        if (!ok[static_cast<std::size_t>(s)]) bad.push_back(s);
    return bad;
}

double max_column_deviation(const SparseMatrix& P_i, const SparseMatrix& P_b) {
    double worst = 0.0;
    for (Index s = 0; s < P_i.cols(); ++s) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(P_i, s); it; ++it) sum += it.value();
        for (SparseMatrix::InnerIterator it(P_b, s); it; ++it) sum += it.value();
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

Lmdp build_lmdp(StatePartition partition, PassiveDynamics passive, RewardModel rewards) {
    const Index ni = partition.n_interior;
    const Index nb = partition.n_boundary;
    if (ni < 1 || nb < 1)
        throw Error(ErrorCode::DimensionMismatch, "need at least one interior and one boundary state");
    if (passive.P_i.rows() != ni || passive.P_i.cols() != ni)
        throw Error(ErrorCode::DimensionMismatch, "P_i must be N_i x N_i");
    if (passive.P_b.rows() != nb || passive.P_b.cols() != ni)
        throw Error(ErrorCode::DimensionMismatch, "P_b must be N_b x N_i");
    if (rewards.r_i.size() != ni || rewards.r_b.size() != nb)
        throw Error(ErrorCode::DimensionMismatch, "reward vectors do not match the partition");
    if (!partition.labels.empty() && static_cast<Index>(partition.labels.size()) != ni + nb)
        throw Error(ErrorCode::DimensionMismatch, "labels must cover every state");

    passive.P_i.makeCompressed();
    passive.P_b.makeCompressed();
    check_entries(passive.P_i, "P_i");
    check_entries(passive.P_b, "P_b");
    const double dev = max_column_deviation(passive.P_i, passive.P_b);
    if (dev > kStochasticTol)
        throw Error(ErrorCode::NotStochastic, "column sum deviates from 1 by " + std::to_string(dev));

    const auto bad = unabsorbed_states(passive.P_i, passive.P_b);
    if (!bad.empty())
        throw Error(ErrorCode::NoAbsorption, "interior state " + std::to_string(bad.front()) +
                                                 " cannot reach the boundary");

    auto q = exponentiate_rewards(rewards);

    Lmdp out;
    out.partition_ = std::move(partition);
    out.passive_ = std::move(passive);
    out.rewards_ = std::move(rewards);
    out.q_i_ = std::move(q.q_i);
    out.q_b_ = std::move(q.q_b);
    return out;
}

} // namespace lmdp
