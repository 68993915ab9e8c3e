#include "lmdp/executor.hpp"
#include "lmdp/error.hpp"

#include <cmath>

namespace lmdp {

namespace {

class Episode {
public:
    Episode(HierarchyStack& stack, Rng& rng, const ExecutorOptions& options,
            HierarchicalTrajectory& traj)
        : stack_(stack), rng_(rng), opt_(options), traj_(traj) {}

    // Layer l >= 1 accessed at its interior state s.
    void ascend(Index l, Index s, AccessEvent& ev) {
        ev.visited.emplace_back(l, s);
        ev.layer_reached = std::max(ev.layer_reached, l);
        const LayerModel& m = stack_.model(l);
        const Index ni = m.lmdp->n_interior();
        const Index nb = m.lmdp->n_boundary();
        const Index j = sample_from(stack_.policy_column(l, s), rng_);
        if (j >= ni + nb) {
            ascend(l + 1, j - ni - nb, ev);
        } else if (j >= ni) {
            stack_.terminate_layer(l);
            ev.terminated_layer = l;
            return;
        }
        stack_.rewards_to_task_weights(l - 1, stack_.inpaint_from(l, s));
    }

    void snapshot(Index event_id) {
        if (!opt_.record_snapshots) return;
        for (Index l = 0; l < stack_.depth(); ++l) {
            const LayerState& st = stack_.state(l);
            traj_.weight_snapshots.push_back({event_id, l, st.weights.w, st.weights.residual});
        }
    }

    void run(Index s0, Index max_steps) {
        const LayerModel& base = stack_.model(0);
        const Lmdp& dyn = base.dynamics();
        const Index ni = dyn.n_interior();
        const Index nb = base.lmdp->n_boundary();
        const double lambda = dyn.lambda();

        snapshot(0);
        traj_.base_states.push_back(s0);
        Index s = s0;
        for (Index t = 0; t < max_steps; ++t) {
            auto col = stack_.policy_column(0, s, opt_.goal_override, opt_.goal_column);
            Index j = sample_from(col, rng_);
            if (j >= ni + nb) {
                AccessEvent ev;
                ev.base_time = t;
                ascend(1, j - ni - nb, ev);
                traj_.access_events.push_back(std::move(ev));
                snapshot(static_cast<Index>(traj_.access_events.size()));
                col = stack_.policy_column(0, s, opt_.goal_override, opt_.goal_column, true);
                j = sample_from(col, rng_);
            }
            double prob = 0.0;
            double kl = 0.0;
            for (const auto& [idx, a] : col) {
                if (idx == j) prob = a;
                const double p = idx < ni ? dyn.P_i().coeff(idx, s) : dyn.P_b().coeff(idx - ni, s);
                kl += a * std::log(a / p);
            }
            traj_.total_return += base.lmdp->rewards().r_i[s] - lambda * kl;
            if (opt_.on_step) opt_.on_step(s, j, prob);
            traj_.base_states.push_back(j);
            if (j >= ni) {
                traj_.reached_boundary = true;
                traj_.total_return += base.lmdp->rewards().r_b[j - ni];
                return;
            }
            s = j;
        }
        traj_.max_steps_exceeded = true;
    }

private:
    HierarchyStack& stack_;
    Rng& rng_;
    const ExecutorOptions& opt_;
    HierarchicalTrajectory& traj_;
};

} // namespace

HierarchicalTrajectory run_episode(HierarchyStack& stack, Index s0, Rng& rng,
                                   const ExecutorOptions& options) {
    const Index ni = stack.model(0).lmdp->n_interior();
    if (s0 < 0 || s0 >= ni) throw Error(ErrorCode::InvalidSpec, "start state must be interior");
    stack.reset();
    HierarchicalTrajectory traj;
    Episode ep(stack, rng, options, traj);
    ep.run(s0, options.max_steps > 0 ? options.max_steps : 100 * ni);
    return traj;
}

Vector desirability_map(const HierarchyStack& stack, const Vector* goal_override, Index goal_column) {
    return stack.composite_interior(0, goal_override, goal_column);
}

} // namespace lmdp
