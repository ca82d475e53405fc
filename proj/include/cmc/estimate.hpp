#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmc/model.hpp"
#include "cmc/linalg.hpp"
#include "cmc/simulate.hpp"

namespace cmc {

// Visit and transition counts for one trajectory (or a merged batch).
//
//   N_s^(l)   = #{ i in 1..m : X_i = s, a_i = l }
//   N_st^(l)  = #{ i in 1..m-1 : X_i = s, X_{i+1} = t, a_i = l }
//
// The i = m visit has no observed successor, hence
// sum_t N_st^(l) in { N_s^(l), N_s^(l) - 1 } for plain counting
// (episode-aware counting drops further transitions, see below).
struct CountTable {
    int d = 0;
    int k = 0;
    std::vector<std::int64_t> visits; // d*k, index s*k + l
    std::vector<std::int64_t> trans;  // k*d*d, index (l*d + s)*d + t

    std::int64_t visit(int s, int l) const { return visits[s * k + l]; }
    std::int64_t transition(int s, int t, int l) const { return trans[(l * d + s) * d + t]; }
    // Successor-observed visits: row sum of the transition counts.
    std::int64_t observed(int s, int l) const;
};

// Empirical estimator with rows normalized by successor-observed visits,
// so every defined row sums to exactly 1. Rows with no observations are
// uniform 1/d and listed in undefined_rows.
struct EstimatedModel {
    CmcModel model;
    std::vector<std::pair<int, int>> undefined_rows; // (s, l), sorted

    bool is_defined(int s, int l) const;
};

struct ErrorReport {
    double sup_error = 0.0; // sup_l || Mhat^(l) - M^(l) ||_inf
    Matrix row_l1;          // d x k, entry (s,l) = sum_t |Mhat_st - M_st|
};

// ---------- operations ----------

CountTable count(const Trajectory& traj, int d, int k);

// Episode-aware counting for data logged with restarts every episode_len
// steps: X_{i+1} at i+1 = 0 mod episode_len is a restart draw, not a kernel
// step, so the transition into it is excluded (visits are unchanged).
// episode_len = 0 means no restarts and matches plain count().
CountTable count(const Trajectory& traj, int d, int k, int episode_len);

// Associative merge for chunked counting.
CountTable merge(const CountTable& a, const CountTable& b);

EstimatedModel estimate(const CountTable& counts);

ErrorReport estimation_error(const EstimatedModel& est, const CmcModel& truth);

} // namespace cmc
