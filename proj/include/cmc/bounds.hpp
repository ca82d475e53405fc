#pragma once

#include <utility>

#include "cmc/linalg.hpp"
#include "cmc/model.hpp"

namespace cmc {

// Inputs to the closed-form visit brackets, tail bounds, and sample-size
// thresholds. The universal constants c and C_pel are only proven to exist,
// so both are configurable and default to 1; calibration stays on the caller.
struct BoundInputs {
    int d = 0;
    int k = 0;
    double T = 0.0;        // conditional expected return-time bound (steps)
    double zeta1 = 0.0;    // excitation upper constant
    double zeta2 = 0.0;    // excitation lower constant
    double C_delta = 0.0;  // bound on max_i (1 + sum_j eta_bar(i,j)), > 1
    double rho_star = 1.0; // sup_{s,l,i} P(X_i = s, a_i = l)
    double C_pel = 1.0;
    double c = 1.0;
    double eps = 0.0;
    double delta = 0.0;

    // max{zeta1, 1 - zeta2}: the operative excitation ceiling.
    double zeta_max() const;
};

// Throws InvalidParameter unless 0 < zeta2 <= zeta1 < 1, T > dk/2, C_delta > 1,
// rho_star in (0,1], eps > 0, delta in (0,1), c >= 1, C_pel > 0.
void validate_bound_inputs(const BoundInputs& in);

// Per-class constants feeding BoundInputs: C bounds 2*sum gamma, C_theta
// bounds sum theta_bar, and C + C_theta + 1 bounds the eta sum constant.
struct ClassConstants {
    double T = 0.0;
    double zeta1 = 0.0;
    double zeta2 = 0.0;
    double C = 0.0;
    double C_theta = 0.0;

    double C_delta() const { return C + C_theta + 1.0; }
};

// Intermediate constants of the geometric-mixing sample-size threshold.
struct BernsteinThreshold {
    double C_T = 0.0;
    double C_zeta = 0.0;
    double C_T_delta = 0.0;
    double C_zeta_delta = 0.0;
    double m_star = 0.0;
};

// ---------- brackets and tails ----------

// (m/(2T), m * zeta_max); requires m >= 2T (MTooSmall).
std::pair<double, double> expected_visit_bracket(const BoundInputs& in, double m);

// 2exp(-(n_low - m/2T)^2 / 2m C_delta^2)
//   + 2exp(-(n_high - m zeta_max)^2 / 2m C_delta^2)
double hoeffding_tail(const BoundInputs& in, double m, double n_low, double n_high);

// Bernstein-type tail with the (log m)^2 correction; uses rho_star for the
// pair-marginal sup and requires m >= 2.
double bernstein_tail(const BoundInputs& in, double m, double n_low, double n_high);

// ---------- sample-size thresholds ----------

// c * max{ (T/eps^2) log(dkT/(eps^2 delta)),
//          C_delta^2 max{T^2, (1-zeta_max)^-2} log(dk/delta) }
double sample_size_hoeffding(const BoundInputs& in);

// C_T   = 64 (C_delta rho_star T^2 + 2T) / C_pel
// C_zeta = 8 (2 C_delta rho_star (1-zeta_max)^-2 + (1-zeta_max)^-1) / C_pel
// C_{T,delta} = C_T log(6dk/delta), C_{zeta,delta} = C_zeta log(6dk/delta)
// m_star = c * max{ 8d/(eps^2 (1+zeta_max)),
//                   2 C_{T,delta} (log C_{T,delta})^2,
//                   2 C_{zeta,delta} (log C_{zeta,delta})^2 }
BernsteinThreshold sample_size_bernstein(const BoundInputs& in);

// ---------- per-class constants ----------

// Stationary randomized controls: T = sup_{s,l} 1/pi_{s,l} over the pair
// chain's stationary law; zeta2 = P_min, zeta1 = 1 - (k-1) P_min, or
// zeta1 = zeta2 = 1/T when the chain starts at its stationary law;
// C = 0, C_theta = 1/(1 - dob) with dob the Dobrushin coefficient of the
// pair transition matrix.
ClassConstants stationary_class_constants(const CmcModel& model, const Matrix& P,
                                          bool starts_stationary);

// Deterministic schedules with revisit window T_sched:
// T = (1-M_min)^(1-1/T_sched) / (1 - (1-M_min)^(1/T_sched)),
// zeta2 = M_min, zeta1 = M_max, C = 0, C_theta = e/(e-1).
ClassConstants schedule_class_constants(const CmcModel& model, int T_sched);

// Non-stationary Markov controls: with M_opt = max{M_max, 1-M_min},
// T = T_star M_max / (M_opt (1-M_opt)), zeta1 = M_max, zeta2 = M_min,
// C = 0, C_theta = 1/(1 - d M_min).
ClassConstants markov_class_constants(const CmcModel& model, double T_star);

// Episodic controls with horizon H and excitation constants:
// T = dkH - 1, C = H^2, C_theta = H, zeta1 = M_max, zeta2 = M_min.
ClassConstants episodic_class_constants(int d, int k, int H, double M_min, double M_max);

// Greedy controls: T = 1/pi_star, zeta1 = zeta2 = 1/k, C = 0, C_theta = 1/upsilon.
ClassConstants greedy_class_constants(int k, double upsilon, double pi_star);

// Assembles BoundInputs from class constants plus accuracy targets.
BoundInputs to_bound_inputs(const ClassConstants& cc, int d, int k, double eps, double delta,
                            double rho_star = 1.0, double c = 1.0, double C_pel = 1.0);

}  // namespace cmc
