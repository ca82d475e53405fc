#include "cmc/simulate.hpp"

#include <cmath>
#include <limits>

namespace cmc {

namespace {

HistoryView prefix_of(const Trajectory& traj, int len) {
    return HistoryView{traj.states.data(), traj.controls.data(), len};
}

// Draws (X_i, a_i) at a joint-draw index (initial step or episodic restart).
void draw_joint(const Distribution& joint, int k, Trajectory& traj, Philox& rng) {
    int p = rng.sample(joint.w);
    traj.states.push_back(pair_state(p, k));
    traj.controls.push_back(pair_control(p, k));
}

void draw_control(const LoggingPolicy& policy, int k, int i, int x, Trajectory& traj, Philox& rng) {
    int omega = 1;
    int a = next_control(policy, k, i, x, prefix_of(traj, i), rng, &omega);
    traj.controls.push_back(a);
    if (policy.is_greedy()) traj.omega.push_back(static_cast<uint8_t>(omega));
}

}  // namespace

Trajectory simulate(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0,
                    int m, uint64_t seed) {
    validate_model(model);
    validate_policy(policy, model.d, model.k);
    if (m < 1) throw InvalidParameter("simulate: m must be >= 1");
    if (d0.size() != model.d * model.k)
        throw DimensionMismatch("simulate: d0 must be a distribution over d*k pairs");

    Philox rng(seed);
    Trajectory traj;
    traj.seed = seed;
    traj.states.reserve(m + 1);
    traj.controls.reserve(m + 1);

    if (restarts_at(policy, 0)) {
        draw_joint(d0, model.k, traj, rng);
    } else {
        Distribution marg = state_marginal(d0, model.d, model.k);
        int x0 = rng.sample(marg.w);
        traj.states.push_back(x0);
        draw_control(policy, model.k, 0, x0, traj, rng);
    }

    for (int i = 1; i <= m; ++i) {
        if (restarts_at(policy, i)) {
            draw_joint(restart_law(policy), model.k, traj, rng);
            continue;
        }
        int prev_s = traj.states[i - 1];
        int prev_a = traj.controls[i - 1];
        const Matrix& M = model.matrices[prev_a];
        int x = rng.sample(&M.a[static_cast<size_t>(prev_s) * model.d], model.d);
        traj.states.push_back(x);
        draw_control(policy, model.k, i, x, traj, rng);
    }
    return traj;
}

Trajectory simulate_via_array_scheme(const CmcModel& model, const LoggingPolicy& policy,
                                     const Distribution& d0, int m, uint64_t seed) {
    validate_model(model);
    validate_policy(policy, model.d, model.k);
    if (m < 1) throw InvalidParameter("simulate: m must be >= 1");
    if (d0.size() != model.d * model.k)
        throw DimensionMismatch("simulate: d0 must be a distribution over d*k pairs");

    Philox rng(seed);

    // pre-drawn transition cells: cells[(l*d + s)*m + tau] ~ M^(l)[s, .]
    std::vector<int32_t> cells(static_cast<size_t>(model.d) * model.k * m);
    for (int l = 0; l < model.k; ++l)
        for (int s = 0; s < model.d; ++s) {
            const double* row = &model.matrices[l].a[static_cast<size_t>(s) * model.d];
            size_t base = (static_cast<size_t>(l) * model.d + s) * m;
            for (int tau = 0; tau < m; ++tau) cells[base + tau] = rng.sample(row, model.d);
        }
    std::vector<int> consumed(static_cast<size_t>(model.d) * model.k, 0);

    Trajectory traj;
    traj.seed = seed;
    traj.states.reserve(m + 1);
    traj.controls.reserve(m + 1);

    if (restarts_at(policy, 0)) {
        draw_joint(d0, model.k, traj, rng);
    } else {
        Distribution marg = state_marginal(d0, model.d, model.k);
        int x0 = rng.sample(marg.w);
        traj.states.push_back(x0);
        draw_control(policy, model.k, 0, x0, traj, rng);
    }

    for (int i = 1; i <= m; ++i) {
        if (restarts_at(policy, i)) {
            draw_joint(restart_law(policy), model.k, traj, rng);
            continue;
        }
        int prev_s = traj.states[i - 1];
        int prev_a = traj.controls[i - 1];
        size_t slot = static_cast<size_t>(prev_a) * model.d + prev_s;
        int x = cells[slot * m + consumed[slot]++];
        traj.states.push_back(x);
        draw_control(policy, model.k, i, x, traj, rng);
    }
    return traj;
}

ReturnTimeStats return_times(const Trajectory& traj, int d, int k) {
    if (traj.states.empty()) throw InvalidParameter("return_times: empty trajectory");
    ReturnTimeStats stats;
    stats.d = d;
    stats.k = k;
    int n = d * k;
    stats.times.resize(n);
    stats.mean.assign(n, std::numeric_limits<double>::quiet_NaN());
    stats.max_time.assign(n, 0);
    stats.visited_at_zero.assign(n, 0);

    std::vector<int> last_visit(n, -1);
    int m = traj.m();
    stats.visited_at_zero[pair_index(traj.states[0], traj.controls[0], k)] = 1;
    for (int i = 1; i <= m; ++i) {
        int p = pair_index(traj.states[i], traj.controls[i], k);
        // hitting time counts from 0, later entries are gaps between visits
        stats.times[p].push_back(last_visit[p] < 0 ? i : i - last_visit[p]);
        last_visit[p] = i;
    }
    for (int p = 0; p < n; ++p) {
        if (stats.times[p].empty()) continue;
        long sum = 0;
        for (int t : stats.times[p]) {
            sum += t;
            stats.max_time[p] = std::max(stats.max_time[p], t);
        }
        stats.mean[p] = static_cast<double>(sum) / stats.times[p].size();
        stats.t_hat = std::max(stats.t_hat, stats.mean[p]);
    }
    return stats;
}

Distribution state_marginal(const Distribution& d0, int d, int k) {
    Distribution marg{std::vector<double>(d, 0.0)};
    for (int s = 0; s < d; ++s)
        for (int l = 0; l < k; ++l) marg.w[s] += d0.w[pair_index(s, l, k)];
    return marg;
}

Distribution joint_initial(const LoggingPolicy& policy, int k, const Distribution& d0_states) {
    int d = d0_states.size();
    Distribution joint{std::vector<double>(static_cast<size_t>(d) * k, 0.0)};
    for (int s = 0; s < d; ++s) {
        Distribution law = control_law(policy, k, 0, s, HistoryView{});
        for (int l = 0; l < k; ++l) joint.w[pair_index(s, l, k)] = d0_states.w[s] * law.w[l];
    }
    return joint;
}

Distribution uniform_pair_distribution(int d, int k) { return uniform_distribution(d * k); }

}  // namespace cmc
