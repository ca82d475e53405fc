#include "cmc/ope.hpp"

#include <algorithm>
#include <cmath>

#include "cmc/errors.hpp"
#include "cmc/rng.hpp"

namespace cmc {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidParameter(msg);
}

}  // namespace

// ---------- problems ----------

void validate_ope_problem(const OpeProblem& problem) {
    const int d = problem.M.rows;
    if (d < 1 || problem.M.cols != d) throw DimensionMismatch("value problem needs a square M");
    if (static_cast<int>(problem.g.size()) != d)
        throw DimensionMismatch("cost vector length must match M");
    require(problem.alpha > 0.0 && problem.alpha < 1.0, "discount must lie strictly inside (0,1)");
    for (int s = 0; s < d; ++s) {
        double sum = 0.0;
        for (int t = 0; t < d; ++t) {
            const double v = problem.M(s, t);
            if (v < 0.0) throw NegativeEntryError("M has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw RowSumError("M row does not sum to 1");
    }
    for (int s : problem.undefined_states)
        if (s < 0 || s >= d) throw DimensionMismatch("undefined state index out of range");
}

// ---------- value computation ----------

double bellman_residual(const OpeProblem& problem, const std::vector<double>& V) {
    if (V.size() != problem.g.size()) throw DimensionMismatch("value vector length mismatch");
    const std::vector<double> MV = mat_vec_multiply(problem.M, V);
    double r = 0.0;
    for (size_t s = 0; s < V.size(); ++s)
        r = std::max(r, std::abs(V[s] - problem.alpha * MV[s] - problem.g[s]));
    return r;
}

std::vector<double> solve_value(const OpeProblem& problem) {
    validate_ope_problem(problem);
    const int d = problem.M.rows;
    Matrix A = Matrix::identity(d);
    for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) A(s, t) -= problem.alpha * problem.M(s, t);
    std::vector<double> V = lu_solve(A, problem.g);
    // Refinement sweeps V <- g + alpha M V; each contracts the error by alpha,
    // and the elimination already lands at machine scale.
    for (int sweep = 0; sweep < 10000 && bellman_residual(problem, V) > 1e-12; ++sweep) {
        std::vector<double> MV = mat_vec_multiply(problem.M, V);
        for (int s = 0; s < d; ++s) V[s] = problem.g[s] + problem.alpha * MV[s];
    }
    return V;
}

double perturbation_bound(const Matrix& M, const Matrix& M_hat, const std::vector<double>& g,
                          double alpha) {
    if (!M.same_shape(M_hat) || M.rows != M.cols) throw DimensionMismatch("matrix shape mismatch");
    if (static_cast<int>(g.size()) != M.rows) throw DimensionMismatch("cost vector length mismatch");
    require(alpha > 0.0 && alpha < 1.0, "discount must lie strictly inside (0,1)");
    const double gap = 1.0 - alpha;
    return alpha * std::sqrt(static_cast<double>(M.rows)) * sup_norm_diff(M_hat, M) * l1_norm(g) /
           (gap * gap);
}

// ---------- policy composition ----------

namespace {

void check_policy_matrix(const Matrix& Pi, int d, int k) {
    if (Pi.rows != d || Pi.cols != k) throw DimensionMismatch("policy matrix must be d x k");
    for (int s = 0; s < d; ++s) {
        double sum = 0.0;
        for (int l = 0; l < k; ++l) {
            if (Pi(s, l) < 0.0) throw NegativeEntryError("policy matrix has a negative entry");
            sum += Pi(s, l);
        }
        if (std::abs(sum - 1.0) > 1e-9) throw RowSumError("policy matrix row does not sum to 1");
    }
}

OpeProblem compose_common(const CmcModel& model, const Matrix& Pi, const Matrix& g_tilde,
                          double alpha) {
    check_policy_matrix(Pi, model.d, model.k);
    if (g_tilde.rows != model.d || g_tilde.cols != model.k)
        throw DimensionMismatch("state-control cost must be d x k");
    OpeProblem out;
    out.M = Matrix(model.d, model.d);
    out.g.assign(model.d, 0.0);
    out.alpha = alpha;
    for (int s = 0; s < model.d; ++s) {
        for (int l = 0; l < model.k; ++l) {
            const double w = Pi(s, l);
            if (w == 0.0) continue;
            out.g[s] += w * g_tilde(s, l);
            for (int t = 0; t < model.d; ++t) out.M(s, t) += w * model.matrices[l](s, t);
        }
    }
    validate_ope_problem(out);
    return out;
}

}  // namespace

OpeProblem compose_policy(const CmcModel& model, const Matrix& Pi, const Matrix& g_tilde,
                          double alpha) {
    validate_model(model);
    return compose_common(model, Pi, g_tilde, alpha);
}

OpeProblem compose_plug_in(const EstimatedModel& est, const Matrix& Pi, const Matrix& g_tilde,
                           double alpha) {
    OpeProblem out = compose_common(est.model, Pi, g_tilde, alpha);
    for (int s = 0; s < est.model.d; ++s)
        for (int l = 0; l < est.model.k; ++l)
            if (Pi(s, l) > 0.0 && !est.is_defined(s, l)) {
                out.undefined_states.push_back(s);
                break;
            }
    return out;
}

std::vector<double> plug_in_value(const EstimatedModel& est, const std::vector<double>& g,
                                  double alpha) {
    if (est.model.k != 1) throw DimensionMismatch("two-argument plug-in requires k = 1");
    OpeProblem problem;
    problem.M = est.model.matrices[0];
    problem.g = g;
    problem.alpha = alpha;
    for (const auto& [s, l] : est.undefined_rows) problem.undefined_states.push_back(s);
    return solve_value(problem);
}

std::vector<double> plug_in_value(const EstimatedModel& est, const Matrix& Pi,
                                  const Matrix& g_tilde, double alpha) {
    return solve_value(compose_plug_in(est, Pi, g_tilde, alpha));
}

// ---------- thresholds ----------

double t_alpha(const std::vector<double>& g, int d, double alpha, double T) {
    require(d >= 1, "need d >= 1");
    require(alpha > 0.0 && alpha < 1.0, "discount must lie strictly inside (0,1)");
    require(T > 0.0, "need T > 0");
    const double l1 = l1_norm(g);
    const double gap = 1.0 - alpha;
    return l1 * l1 * d * alpha * alpha * T / (gap * gap * gap * gap);
}

double ope_sample_size(const BoundInputs& in, const std::vector<double>& g, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "discount must lie strictly inside (0,1)");
    const double l1 = l1_norm(g);
    require(l1 > 0.0, "cost vector must be nonzero");
    // A matrix error of eps (1-alpha)^2 / (|g|_1 sqrt(d) alpha) transfers to a
    // value error of eps through the perturbation bound.
    BoundInputs scaled = in;
    const double gap = 1.0 - alpha;
    scaled.eps = in.eps * gap * gap / (l1 * std::sqrt(static_cast<double>(in.d)) * alpha);
    return sample_size_hoeffding(scaled);
}

// ---------- greedy recovery ----------

Trajectory greedy_transform(const Trajectory& traj, int d, int k, uint64_t seed) {
    require(d >= 1 && k >= 1, "need d >= 1 and k >= 1");
    if (traj.omega.size() != traj.states.size() || traj.states.empty())
        throw MissingFlags("greedy transform needs exploration flags on every step");
    if (traj.controls.size() != traj.states.size())
        throw DimensionMismatch("trajectory states and controls misaligned");
    Philox rng(seed);
    Trajectory out;
    out.seed = seed;
    out.omega = traj.omega;
    out.states.resize(traj.states.size());
    out.controls.resize(traj.controls.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const int x = traj.states[i];
        const int a = traj.controls[i];
        require(x >= 0 && x < d && a >= 0 && a < k, "trajectory entry out of range");
        if (traj.omega[i]) {
            out.states[i] = d + x;
            out.controls[i] = a;
        } else {
            out.states[i] = rng.next_index(d);
            out.controls[i] = rng.next_index(k);
        }
    }
    return out;
}

GreedyRecovery recover_greedy_M(const CmcModel& est_augmented, double upsilon,
                                double row_sum_tol) {
    if (!(upsilon > 0.0 && upsilon < 1.0))
        throw InvalidUpsilon("exploration probability must lie strictly inside (0,1)");
    require(row_sum_tol > 0.0, "row sum tolerance must be positive");
    if (est_augmented.d < 2 || est_augmented.d % 2 != 0)
        throw DimensionMismatch("augmented model must have an even state count 2d");
    const int d = est_augmented.d / 2;
    const int k = est_augmented.k;
    if (static_cast<int>(est_augmented.matrices.size()) != k)
        throw DimensionMismatch("augmented model matrix count mismatch");

    GreedyRecovery out;
    out.model.d = d;
    out.model.k = k;
    for (int l = 0; l < k; ++l) {
        Matrix raw(d, d);
        Matrix row_normalized(d, d);
        for (int s = 0; s < d; ++s) {
            double sum = 0.0;
            for (int t = 0; t < d; ++t) {
                raw(s, t) = est_augmented.matrices[l](d + s, d + t) / upsilon;
                sum += raw(s, t);
            }
            if (sum <= 0.0) {
                for (int t = 0; t < d; ++t) row_normalized(s, t) = 1.0 / d;
                out.flagged_rows.emplace_back(s, l);
            } else {
                for (int t = 0; t < d; ++t) row_normalized(s, t) = raw(s, t) / sum;
                if (std::abs(sum - 1.0) > row_sum_tol) out.flagged_rows.emplace_back(s, l);
            }
        }
        out.raw.push_back(std::move(raw));
        out.model.matrices.push_back(std::move(row_normalized));
    }
    validate_model(out.model);
    return out;
}

}  // namespace cmc
