#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "cmc/model.hpp"
#include "cmc/rng.hpp"

namespace cmc {

// ---------- logging-policy classes ----------
// The five control-generation mechanisms the simulator understands. Each
// exposes both a sampler (next_control) and its exact conditional law
// (control_law) so simulation and path enumeration share one definition.

// Prefix of a trajectory: pairs (states[t], controls[t]) for t < len.
struct HistoryView {
    const int32_t* states = nullptr;
    const int32_t* controls = nullptr;
    int len = 0;
};

// a_i ~ P[x_i, .], independent of time and history.
struct StationaryRandomized {
    Matrix P;  // d x k, rows sum to 1
};

// a_i = seq[i] (periodic repetition or clamped explicit list). `window` is the
// revisit window the schedule claims to satisfy; 0 means unchecked.
struct DeterministicSchedule {
    std::vector<int> seq;
    bool periodic = true;
    int window = 0;
};

// a_i ~ tables[i][x_i, .]; the last table repeats beyond the list.
struct NonStationaryMarkov {
    std::vector<Matrix> tables;  // each d x k
};

// Restarts every H steps: at i = 0 mod H the pair (X_i,a_i) is drawn jointly
// from `restart` (over d*k pairs), overriding the transition kernel. Within an
// episode the control law depends on the episode-local offset e = i mod H:
// within.tables[e-1] (clamped to the last entry).
struct Episodic {
    int H = 1;
    NonStationaryMarkov within;
    Distribution restart;
};

// Exploration flag omega_i ~ Bernoulli(upsilon); omega = 1 draws the control
// uniformly, omega = 0 follows the base table.
struct Greedy {
    double upsilon = 0.5;
    Matrix base;  // d x k, rows sum to 1
};

using PolicyVariant =
    std::variant<StationaryRandomized, DeterministicSchedule, NonStationaryMarkov, Episodic, Greedy>;

struct LoggingPolicy {
    PolicyVariant v;

    bool is_greedy() const { return std::holds_alternative<Greedy>(v); }
    bool is_episodic() const { return std::holds_alternative<Episodic>(v); }

    const char* kind() const;
};

// ---------- operations ----------

// Shape/stochasticity checks against a model of dimensions (d, k).
void validate_policy(const LoggingPolicy& policy, int d, int k);

// True when the pair at time i is redrawn from restart_law regardless of
// history (episodic policies at multiples of H, including i = 0).
bool restarts_at(const LoggingPolicy& policy, int i);

// H for episodic controls, 0 for every other class. Feed this to the
// episode-aware count() overload so restart draws are not mistaken for
// kernel transitions.
int restart_period(const LoggingPolicy& policy);

const Distribution& restart_law(const LoggingPolicy& policy);

// Exact conditional law of a_i given X_i = x and the history. At an episodic
// restart index this is the restart law conditioned on the state coordinate.
Distribution control_law(const LoggingPolicy& policy, int k, int i, int x,
                         const HistoryView& history);

// Draws a_i. For Greedy the exploration flag lands in *omega_out (1 = uniform
// draw); other variants leave it untouched.
int next_control(const LoggingPolicy& policy, int k, int i, int x, const HistoryView& history,
                 Philox& rng, int* omega_out = nullptr);

// Control value of a deterministic schedule at time i.
int schedule_control(const DeterministicSchedule& sched, int i);

// Checks that every window of `window`+1 consecutive entries contains every
// control in {0,...,k-1} more than once.
bool verify_revisit_window(const std::vector<int>& schedule, int window, int k);

// Convenience builders.
LoggingPolicy make_stationary_policy(Matrix P);
LoggingPolicy make_schedule_policy(std::vector<int> seq, bool periodic = true, int window = 0);
LoggingPolicy make_markov_policy(std::vector<Matrix> tables);
LoggingPolicy make_episodic_policy(int H, std::vector<Matrix> within_tables, Distribution restart);
LoggingPolicy make_greedy_policy(double upsilon, Matrix base);

}  // namespace cmc
