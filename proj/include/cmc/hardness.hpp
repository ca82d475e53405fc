#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cmc/model.hpp"
#include "cmc/policies.hpp"
#include "cmc/simulate.hpp"

namespace cmc {

// Two perturbed instance families used to probe estimator difficulty, plus the
// block-visiting (touring) experiment.
//
//   sigma family: a single chain (k = 1) on d+1 states. Rows 0..d-1 are
//   ((1-p*)/d, ..., (1-p*)/d, p*); row d places (1 - p* + 16*sigma_i*eps)/d
//   and (1 - p* - 16*sigma_i*eps)/d on column pair (2i, 2i+1) and p* on
//   column d. Flipping one sigma coordinate moves the last row by 64*eps/d
//   in sup norm while perturbing the stationary law only at order eps.
//
//   block family: k controls on d states, d divisible by 3. With B1 the first
//   d/3 states and B2 the rest, every row gives each B1 state mass 3*iota/d;
//   B2 rows are lazy (mass 1-iota on themselves); B1 row i spreads its B2
//   mass as a near-uniform pair (1 +- xi_i*eps - 2*iota)/2 on columns
//   (d/3 + 2i, d/3 + 2i + 1) with 3*iota/(2(d-3)) elsewhere. At d = 3 the
//   off terms vanish and the pair becomes (1 +- xi*eps - iota)/2.

// ---------- parameters ----------

struct PerturbedFamilyParams {
    int d = 2;
    int k = 1;                         // block family only; sigma family is k = 1
    double p_star = 0.2;               // sigma family
    double eps = 0.01;                 // both families; admissible range [0, 1/32)
    double iota = 0.3;                 // block family; range (0, 31/64)
    std::vector<int> sigma;            // length d/2, entries +-1
    std::vector<std::vector<int>> xi;  // k vectors of length d/3, entries in {-1, 0, +1}
};

// ---------- code sets ----------

struct GvSet {
    std::vector<std::vector<int>> codewords;  // +-1 vectors of length n
    double target = 0.0;                      // 2^(n/8)
    bool target_met = false;                  // codewords.size() >= target
};

// ---------- touring ----------

inline constexpr int64_t kNeverToured = std::numeric_limits<int64_t>::max();

struct TouringTime {
    int64_t value = kNeverToured;  // smallest i with every target pair among (X_1,a_1)..(X_i,a_i)
    int pairs_required = 0;        // (d/3) * k target pairs: first-block states under every control

    bool finite() const { return value != kNeverToured; }
};

struct CoverTimeResult {
    int64_t n = 0;
    int replications = 0;
    double survival = 0.0;  // empirical P(touring time > n)
    double ci_low = 0.0;    // 99% normal-approximation interval, clamped to [0, 1]
    double ci_high = 0.0;
    double threshold_statement = 0.0;  // (dk/6 iota) * log(dk/3)
    double threshold_proof = 0.0;      // (dk/6 iota) * (log(dk/3) + 1)
};

// ---------- operations ----------

// k = 1 chain on d+1 states; throws InvalidParameter outside the admissible
// ranges (d even >= 2, p* in (0, 1/(d+1)), eps in [0, 1/32), sigma entries +-1).
CmcModel build_sigma_instance(const PerturbedFamilyParams& params);

// Closed-form stationary law of the sigma instance: with q = 1 - p*,
// pi_{2i} = (q^2 + p*q + 16 p* sigma_i eps)/d, pi_{2i+1} the - twin,
// pi_d = p*.
std::vector<double> sigma_stationary(const PerturbedFamilyParams& params);

// d states, k controls; throws InvalidParameter outside the admissible ranges
// (d divisible by 3, iota in (0, 31/64), eps in [0, 1/32), xi shape k x d/3
// with entries in {-1, 0, +1}).
CmcModel build_block_instance(const PerturbedFamilyParams& params);

// Closed-form stationary law of M^(control): 3*iota/d on B1,
// 3(1 +- xi_i*eps - iota)/(2d) on the B2 column pairs.
std::vector<double> block_stationary(const PerturbedFamilyParams& params, int control);

// Exact stationary law of the (X_i, a_i) pair process under uniform controls:
// nu (x) uniform, where nu is the stationary law of the control-averaged
// matrix (closed form above with xi replaced by its mean across controls).
Distribution block_pair_stationary(const PerturbedFamilyParams& params);

// Stationary randomized policy with every row uniform over the k controls.
LoggingPolicy block_uniform_policy(int d, int k);

// Greedy lexicographic scan over {+-1}^n keeping vectors at pairwise Hamming
// distance >= min_dist, stopping once ceil(2^(n/8)) codewords are found. At
// small n the target can be unreachable; the maximal found set is returned
// with target_met = false.
GvSet gilbert_varshamov_set(int n, int min_dist);

// First index i >= 1 such that all (d/3)*k pairs (state in first block,
// any control) appear among (X_1, a_1), ..., (X_i, a_i); kNeverToured if the
// trajectory ends first.
TouringTime touring_time(const Trajectory& traj, int d, int k);

// Empirical P(touring time > n) over independent block-instance trajectories
// started from the pair-stationary law under uniform controls. Replication r
// uses derive_child_seed(seed, r), so results are independent of threads.
CoverTimeResult cover_time_experiment(const PerturbedFamilyParams& params, int64_t n,
                                      int replications, uint64_t seed, int threads = 1);

}  // namespace cmc
