#pragma once

#include <cstdint>
#include <vector>

#include "cmc/model.hpp"
#include "cmc/policies.hpp"

namespace cmc {

// ---------- trajectories ----------

struct Trajectory {
    std::vector<int32_t> states;    // X_0..X_m
    std::vector<int32_t> controls;  // a_0..a_m
    std::vector<uint8_t> omega;     // greedy exploration flags, empty otherwise
    uint64_t seed = 0;

    int m() const { return static_cast<int>(states.size()) - 1; }
};

struct ReturnTimeStats {
    int d = 0, k = 0;
    std::vector<std::vector<int>> times;  // per pair s*k+l: hitting time then gaps
    std::vector<double> mean;             // NaN for never-visited pairs
    std::vector<int> max_time;
    std::vector<uint8_t> visited_at_zero;
    double t_hat = 0.0;  // sup over pairs of the empirical mean
};

// ---------- operations ----------

// Forward sampler. X_0 comes from the state marginal of d0 and a_0 from the
// policy, except for episodic policies where i = 0 is a restart and the pair
// is drawn jointly from d0. Thereafter X_{i+1} ~ M^(a_i)[X_i, .] and controls
// follow the policy, with episodic restarts redrawing the pair jointly.
Trajectory simulate(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0,
                    int m, uint64_t seed);

// Coupled sampler: pre-draws i.i.d. arrays cell[l][s][tau] ~ M^(l)[s, .] and
// walks them, consuming entry (x, a, #prior consumptions of (x,a)). Controls
// and restarts use the same machinery as simulate. Output is identically
// distributed to simulate's, through different plumbing.
Trajectory simulate_via_array_scheme(const CmcModel& model, const LoggingPolicy& policy,
                                     const Distribution& d0, int m, uint64_t seed);

// Hitting time (first index n >= 1 at the pair) followed by gaps between
// consecutive visits; index-0 visits are recorded separately.
ReturnTimeStats return_times(const Trajectory& traj, int d, int k);

// Marginal over states of a pair distribution.
Distribution state_marginal(const Distribution& d0, int d, int k);

// Joint pair distribution w(x,a) = d0_states(x) * P(a_0 = a | X_0 = x) built
// from the policy's law at i = 0.
Distribution joint_initial(const LoggingPolicy& policy, int k, const Distribution& d0_states);

Distribution uniform_pair_distribution(int d, int k);

}  // namespace cmc
