#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmc/bounds.hpp"
#include "cmc/estimate.hpp"
#include "cmc/linalg.hpp"
#include "cmc/model.hpp"
#include "cmc/simulate.hpp"

namespace cmc {

// Discounted value computation V = (I - alpha M)^{-1} g, plug-in variants fed
// by the estimator, the perturbation bound relating matrix error to value
// error, and the exploration-flag pipeline that recovers M from greedy logs.

// ---------- problems ----------

struct OpeProblem {
    Matrix M;               // row-stochastic d x d
    std::vector<double> g;  // per-stage cost, length d
    double alpha = 0.0;     // discount, strictly inside (0, 1)
    // States whose M rows were uniform-filled placeholders upstream (no data);
    // carried as a warning channel, not an error.
    std::vector<int> undefined_states;
};

void validate_ope_problem(const OpeProblem& problem);

// ---------- value computation ----------

// Dense pivoted elimination plus iterative refinement sweeps V <- g + alpha M V
// until the max-norm residual of (I - alpha M)V = g falls below 1e-12
// (guaranteed to terminate: the sweep contracts by alpha).
std::vector<double> solve_value(const OpeProblem& problem);

double bellman_residual(const OpeProblem& problem, const std::vector<double>& V);

// alpha sqrt(d) |M_hat - M|_inf |g|_1 / (1-alpha)^2, an upper bound for
// |V_hat - V|_inf.
double perturbation_bound(const Matrix& M, const Matrix& M_hat, const std::vector<double>& g,
                          double alpha);

// ---------- policy composition ----------

// Row s of the composed matrix is sum_l Pi(s,l) M^(l)[s,.]; the composed cost
// is g(s) = sum_l Pi(s,l) g_tilde(s,l). Pi and g_tilde are d x k.
OpeProblem compose_policy(const CmcModel& model, const Matrix& Pi, const Matrix& g_tilde,
                          double alpha);

// compose_policy on the estimated model; states with any undefined row (s,l)
// reachable under Pi(s,l) > 0 land in undefined_states.
OpeProblem compose_plug_in(const EstimatedModel& est, const Matrix& Pi, const Matrix& g_tilde,
                           double alpha);

// Value of the plug-in problem. The two-argument form requires k = 1.
std::vector<double> plug_in_value(const EstimatedModel& est, const std::vector<double>& g,
                                  double alpha);
std::vector<double> plug_in_value(const EstimatedModel& est, const Matrix& Pi,
                                  const Matrix& g_tilde, double alpha);

// ---------- thresholds ----------

// T_alpha = |g|_1^2 d alpha^2 T / (1-alpha)^4.
double t_alpha(const std::vector<double>& g, int d, double alpha, double T);

// Trajectory length after which the matrix-error threshold transfers to a
// value-error guarantee of in.eps: sample_size_hoeffding with
// eps -> eps (1-alpha)^2 / (|g|_1 sqrt(d) alpha).
double ope_sample_size(const BoundInputs& in, const std::vector<double>& g, double alpha);

// ---------- greedy recovery ----------

// Masks non-exploration steps: at omega_i = 0 the state and control are
// replaced by fresh independent uniform draws, and the flag is folded into the
// augmented state omega*d + x over 2d states. Throws MissingFlags when the
// trajectory carries no omega column.
Trajectory greedy_transform(const Trajectory& traj, int d, int k, uint64_t seed);

struct GreedyRecovery {
    CmcModel model;            // recovered d x d per control, rows renormalized
    std::vector<Matrix> raw;   // (1/upsilon) x bottom-right block before renormalization
    // (state, control) rows whose raw sum missed 1 by more than the tolerance
    // (including no-data rows, which fall back to uniform).
    std::vector<std::pair<int, int>> flagged_rows;
};

// Inverts the construction: M_hat^(l) = (1/upsilon) x block [d..2d) x [d..2d)
// of the augmented estimate.
GreedyRecovery recover_greedy_M(const CmcModel& est_augmented, double upsilon,
                                double row_sum_tol = 0.05);

}  // namespace cmc
