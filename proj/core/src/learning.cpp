#include "lmdp/learning.hpp"
#include "lmdp/error.hpp"

#include <cmath>

namespace lmdp {

LearningState::LearningState(Index n_interior, const Vector& q_b, double init, double c_)
    : z_hat(Vector::Constant(n_interior, init)), z_b(q_b), visits(Vector::Zero(n_interior)), c(c_) {
    if (!(init > 0.0)) throw Error(ErrorCode::InvalidSpec, "initial estimate must be positive");
    if (!(c_ > 0.0)) throw Error(ErrorCode::InvalidSpec, "step-size constant must be positive");
}

double LearningState::next_alpha(Index s) const { return c / (c + visits[s] + 1.0); }

void z_learning_step(LearningState& state, Index s, double r, Index s_next, double lambda,
                     double alpha, double weight) {
    const Index ni = state.z_hat.size();
    const double z_next = s_next < ni ? state.z_hat[s_next] : state.z_b[s_next - ni];
    state.z_hat[s] = (1.0 - alpha) * state.z_hat[s] + alpha * std::exp(r / lambda) * z_next * weight;
}

void z_learning_update(LearningState& state, Index s, double r, Index s_next, double lambda,
                       double weight) {
    const double alpha = state.next_alpha(s);
    state.visits[s] += 1.0;
    z_learning_step(state, s, r, s_next, lambda, alpha, weight);
}

namespace {

HierarchyStack flat_stack(const Lmdp& domain, const Vector& goal_q_b) {
    Mlmdp m{std::make_shared<const Lmdp>(domain), Matrix(goal_q_b)};
    return build_stack(m, {}, goal_q_b);
}

} // namespace

TrainResult train(const Lmdp& domain, const Vector& goal_q_b, HierarchyStack* stack,
                  const TrainOptions& options, std::uint64_t seed) {
    const Index ni = domain.n_interior();
    if (goal_q_b.size() != domain.n_boundary())
        throw Error(ErrorCode::DimensionMismatch, "goal must have N_b entries");
    if (stack != nullptr && stack->model(0).lmdp->n_interior() != ni)
        throw Error(ErrorCode::DimensionMismatch, "stack base does not match the domain");

    TrainResult out{{}, {}, LearningState(ni, goal_q_b, options.init, options.c)};
    if (options.epochs <= 0) return out;

    HierarchyStack own = flat_stack(domain, goal_q_b);
    HierarchyStack& exec = stack != nullptr ? *stack : own;
    if (stack != nullptr) exec.set_goal(goal_q_b);

    Rng rng(seed);
    LearningState& st = out.state;
    const Lmdp& L = domain;
    const double lambda = L.lambda();

    ExecutorOptions eo;
    eo.max_steps = options.max_steps;
    eo.goal_override = &st.z_hat;
    eo.goal_column = stack != nullptr ? options.goal_column : 0;
    eo.record_snapshots = false;
    eo.on_step = [&](Index s, Index next, double b) {
        const double p = next < ni ? L.P_i().coeff(next, s) : L.P_b().coeff(next - ni, s);
        z_learning_update(st, s, L.rewards().r_i[s], next, lambda, p / b);
    };

    for (Index e = 0; e < options.epochs; ++e) {
        std::vector<double> lengths;
        for (Index k = 0; k < options.episodes_per_epoch; ++k) {
            const auto traj = run_episode(exec, options.start, rng, eo);
            lengths.push_back(static_cast<double>(traj.steps()));
        }
        double mean = 0.0;
        for (double x : lengths) mean += x;
        mean /= static_cast<double>(lengths.size());
        double var = 0.0;
        for (double x : lengths) var += (x - mean) * (x - mean);
        const double n = static_cast<double>(lengths.size());
        const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
        out.mean_length.push_back(mean);
        out.stderr_length.push_back(se);
        st.curve.push_back(mean);
        st.epoch = e + 1;
    }
    return out;
}

} // namespace lmdp
