#pragma once

#include <vector>

#include "cmc/errors.hpp"
#include "cmc/linalg.hpp"

namespace cmc {

// ---------- core domain types ----------
// Indices are 0-based everywhere, including serialization; displays add 1.
// A state-control pair (s,l) flattens to s*k + l.

inline constexpr double kRowSumTol = 1e-12;

struct CmcModel {
    int d = 0;                     // |states|
    int k = 0;                     // |controls|
    std::vector<Matrix> matrices;  // k row-stochastic d x d transition matrices
};

struct Distribution {
    std::vector<double> w;

    int size() const { return static_cast<int>(w.size()); }
};

struct StateControl {
    int state = 0;
    int control = 0;

    bool operator==(const StateControl& o) const {
        return state == o.state && control == o.control;
    }
};

inline int pair_index(int s, int l, int k) { return s * k + l; }
inline int pair_state(int p, int k) { return p / k; }
inline int pair_control(int p, int k) { return p % k; }

// ---------- operations ----------

// Enforces: k matrices, each d x d, entries in [0,1], rows summing to 1
// within kRowSumTol. Returns its argument on success.
const CmcModel& validate_model(const CmcModel& m);

Distribution validate_distribution(Distribution dist);

// Fixed point pi of pi = pi M for an ergodic row-stochastic M.
Distribution stationary_distribution(const Matrix& M);

// Joint (state,control) chain for a stationary randomized control table P
// (d x k, rows over controls). Entry ((s,l),(t,l')) = M^(l)[s,t] * P[t,l'].
Matrix paired_chain(const CmcModel& model, const Matrix& P);

Distribution uniform_distribution(int n);

}  // namespace cmc
