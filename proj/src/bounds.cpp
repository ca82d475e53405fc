#include "cmc/bounds.hpp"

#include <cmath>

#include "cmc/errors.hpp"

namespace cmc {

namespace {

std::pair<double, double> entry_range(const CmcModel& model) {
    double lo = 1.0, hi = 0.0;
    for (const Matrix& M : model.matrices)
        for (double v : M.a) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return {lo, hi};
}

void require(bool ok, const char* msg) {
    if (!ok) throw InvalidParameter(msg);
}

}  // namespace

double BoundInputs::zeta_max() const { return std::max(zeta1, 1.0 - zeta2); }

void validate_bound_inputs(const BoundInputs& in) {
    require(in.d >= 1 && in.k >= 1, "bound inputs: d and k must be >= 1");
    require(in.zeta2 > 0.0 && in.zeta2 <= in.zeta1 && in.zeta1 < 1.0,
            "bound inputs: need 0 < zeta2 <= zeta1 < 1");
    require(in.T > 0.5 * in.d * in.k, "bound inputs: need T > dk/2");
    require(in.C_delta > 1.0, "bound inputs: need C_delta > 1");
    require(in.rho_star > 0.0 && in.rho_star <= 1.0, "bound inputs: need rho_star in (0,1]");
    require(in.C_pel > 0.0, "bound inputs: need C_pel > 0");
    require(in.c >= 1.0, "bound inputs: need c >= 1");
    require(in.eps > 0.0, "bound inputs: need eps > 0");
    require(in.delta > 0.0 && in.delta < 1.0, "bound inputs: need delta in (0,1)");
}

// ---------- brackets and tails ----------

std::pair<double, double> expected_visit_bracket(const BoundInputs& in, double m) {
    validate_bound_inputs(in);
    if (m < 2.0 * in.T)
        throw MTooSmall("expected_visit_bracket: need m >= 2T = " + std::to_string(2.0 * in.T));
    return {m / (2.0 * in.T), m * in.zeta_max()};
}

double hoeffding_tail(const BoundInputs& in, double m, double n_low, double n_high) {
    validate_bound_inputs(in);
    double dev_low = n_low - m / (2.0 * in.T);
    double dev_high = n_high - m * in.zeta_max();
    double denom = 2.0 * m * in.C_delta * in.C_delta;
    return 2.0 * std::exp(-dev_low * dev_low / denom) +
           2.0 * std::exp(-dev_high * dev_high / denom);
}

double bernstein_tail(const BoundInputs& in, double m, double n_low, double n_high) {
    validate_bound_inputs(in);
    require(m >= 2.0, "bernstein_tail: need m >= 2");
    double log2m = std::log(m) * std::log(m);
    double var_term = 4.0 * m * in.C_delta * in.rho_star + 1.0;
    double dev_low = n_low - m / (2.0 * in.T);
    double dev_high = n_high - m * in.zeta_max();
    double denom_low = var_term + (m / (2.0 * in.T) - n_low) * log2m;
    double denom_high = var_term + dev_high * log2m;
    return 2.0 * std::exp(-in.C_pel * dev_low * dev_low / denom_low) +
           2.0 * std::exp(-in.C_pel * dev_high * dev_high / denom_high);
}

// ---------- sample-size thresholds ----------

double sample_size_hoeffding(const BoundInputs& in) {
    validate_bound_inputs(in);
    double z = in.zeta_max();
    double branch_return =
        (in.T / (in.eps * in.eps)) *
        std::log(in.d * in.k * in.T / (in.eps * in.eps * in.delta));
    double branch_mixing = in.C_delta * in.C_delta *
                           std::max(in.T * in.T, 1.0 / ((1.0 - z) * (1.0 - z))) *
                           std::log(in.d * in.k / in.delta);
    return in.c * std::max(branch_return, branch_mixing);
}

BernsteinThreshold sample_size_bernstein(const BoundInputs& in) {
    validate_bound_inputs(in);
    double z = in.zeta_max();
    BernsteinThreshold out;
    out.C_T = 64.0 * (in.C_delta * in.rho_star * in.T * in.T + 2.0 * in.T) / in.C_pel;
    out.C_zeta = 8.0 *
                 (2.0 * in.C_delta * in.rho_star / ((1.0 - z) * (1.0 - z)) + 1.0 / (1.0 - z)) /
                 in.C_pel;
    double log_term = std::log(6.0 * in.d * in.k / in.delta);
    out.C_T_delta = out.C_T * log_term;
    out.C_zeta_delta = out.C_zeta * log_term;
    double branch_eps = 8.0 * in.d / (in.eps * in.eps * (1.0 + z));
    double branch_T = 2.0 * out.C_T_delta * std::log(out.C_T_delta) * std::log(out.C_T_delta);
    double branch_zeta =
        2.0 * out.C_zeta_delta * std::log(out.C_zeta_delta) * std::log(out.C_zeta_delta);
    out.m_star = in.c * std::max({branch_eps, branch_T, branch_zeta});
    return out;
}

// ---------- per-class constants ----------

ClassConstants stationary_class_constants(const CmcModel& model, const Matrix& P,
                                          bool starts_stationary) {
    validate_model(model);
    Matrix Q = paired_chain(model, P);
    std::vector<double> pi = power_iteration_stationary(Q);
    double pi_min = 1.0;
    for (double v : pi) pi_min = std::min(pi_min, v);
    require(pi_min > 0.0, "stationary class: stationary law must be positive on all pairs");
    double P_min = 1.0;
    for (double v : P.a) P_min = std::min(P_min, v);
    double dob = dobrushin_coefficient(Q);
    require(dob < 1.0, "stationary class: pair chain must contract (Dobrushin < 1)");

    ClassConstants cc;
    cc.T = 1.0 / pi_min;
    if (starts_stationary) {
        cc.zeta1 = cc.zeta2 = pi_min;
    } else {
        require(P_min > 0.0, "stationary class: policy table needs positive entries");
        cc.zeta2 = P_min;
        cc.zeta1 = 1.0 - (model.k - 1) * P_min;
    }
    cc.C = 0.0;
    cc.C_theta = 1.0 / (1.0 - dob);
    return cc;
}

ClassConstants schedule_class_constants(const CmcModel& model, int T_sched) {
    validate_model(model);
    require(T_sched >= 1, "schedule class: revisit window must be >= 1");
    auto [M_min, M_max] = entry_range(model);
    require(M_min > 0.0, "schedule class: transition entries must be positive");
    require(M_max < 1.0, "schedule class: transition entries must be < 1");

    ClassConstants cc;
    double q = 1.0 - M_min;
    double inv = 1.0 / T_sched;
    cc.T = std::pow(q, 1.0 - inv) / (1.0 - std::pow(q, inv));
    cc.zeta2 = M_min;
    cc.zeta1 = M_max;
    cc.C = 0.0;
    cc.C_theta = std::exp(1.0) / (std::exp(1.0) - 1.0);
    return cc;
}

ClassConstants markov_class_constants(const CmcModel& model, double T_star) {
    validate_model(model);
    require(T_star > 0.0, "markov class: T_star must be positive");
    auto [M_min, M_max] = entry_range(model);
    require(M_min > 0.0, "markov class: transition entries must be positive");
    require(M_max < 1.0, "markov class: transition entries must be < 1");
    require(model.d * M_min < 1.0, "markov class: need d*M_min < 1");

    ClassConstants cc;
    double M_opt = std::max(M_max, 1.0 - M_min);
    cc.T = T_star * M_max / (M_opt * (1.0 - M_opt));
    cc.zeta1 = M_max;
    cc.zeta2 = M_min;
    cc.C = 0.0;
    cc.C_theta = 1.0 / (1.0 - model.d * M_min);
    return cc;
}

ClassConstants episodic_class_constants(int d, int k, int H, double M_min, double M_max) {
    require(d >= 1 && k >= 1, "episodic class: d and k must be >= 1");
    require(H >= 1, "episodic class: H must be >= 1");
    require(M_min > 0.0 && M_min <= M_max && M_max < 1.0,
            "episodic class: need 0 < M_min <= M_max < 1");

    ClassConstants cc;
    cc.T = static_cast<double>(d) * k * H - 1.0;
    cc.zeta1 = M_max;
    cc.zeta2 = M_min;
    cc.C = static_cast<double>(H) * H;
    cc.C_theta = H;
    return cc;
}

ClassConstants greedy_class_constants(int k, double upsilon, double pi_star) {
    require(k >= 2, "greedy class: need k >= 2 for zeta1 = 1/k < 1");
    if (!(upsilon > 0.0 && upsilon < 1.0))
        throw InvalidUpsilon("greedy class: upsilon must lie in (0,1)");
    require(pi_star > 0.0 && pi_star <= 1.0, "greedy class: pi_star must lie in (0,1]");

    ClassConstants cc;
    cc.T = 1.0 / pi_star;
    cc.zeta1 = cc.zeta2 = 1.0 / k;
    cc.C = 0.0;
    cc.C_theta = 1.0 / upsilon;
    return cc;
}

BoundInputs to_bound_inputs(const ClassConstants& cc, int d, int k, double eps, double delta,
                            double rho_star, double c, double C_pel) {
    BoundInputs in;
    in.d = d;
    in.k = k;
    in.T = cc.T;
    in.zeta1 = cc.zeta1;
    in.zeta2 = cc.zeta2;
    in.C_delta = cc.C_delta();
    in.rho_star = rho_star;
    in.C_pel = C_pel;
    in.c = c;
    in.eps = eps;
    in.delta = delta;
    return in;
}

}  // namespace cmc
