#pragma once

#include <cstdint>
#include <vector>

#include "cmc/linalg.hpp"
#include "cmc/pathlaw.hpp"

namespace cmc {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// Exact mixing coefficients of the pair process, computed by full path
// enumeration. All tables are (m+1)x(m+1) indexed (i, j) and hold NaN outside
// their defined range:
//
//   eta_bar(i,j)   j > i : sup TV between tail-block laws (pairs j..m) under
//                  any two positive-probability conditionings (hist, y_i) —
//                  the diameter of the conditional tail laws. The sup ranges
//                  over PAIRS of histories; restricting both sides to one
//                  common history would break phi <= eta_bar on periodic
//                  chains.
//   phi(i,j)       j > i : sup TV between the tail-block law given a full
//                  history of pairs 0..i and the unconditional tail-block law.
//   theta_bar(i,j) j > i : sup TV between state laws L(X_j | y_i = y1) and
//                  L(X_j | y_i = y2) over y1 != y2 with positive marginals.
//   gamma[p](i,j)  j >= 1, i+j <= p <= m : sup TV between control laws at p
//                  given (X_p, near pairs i+j..p-1, remote pairs 0..i) and
//                  given (X_p, near pairs i+j..p-1); the gap i+1..i+j-1 is
//                  marginalized in both. p = i+j has an empty near segment.
//
// The sup over tail event sets is computed via sup_T |P1(T)-P2(T)| = TV.
// Unconditional laws are taken under the supplied d0, which is recorded here.
struct MixingReport {
    int d = 0;
    int k = 0;
    int m = 0;
    Distribution d0;
    Matrix eta_bar;
    Matrix phi;
    Matrix theta_bar;
    std::vector<Matrix> gamma;  // length m+1, gamma[p](i, j)
    double delta_norm = 0.0;
};

// ---------- coefficient computations ----------
// All throw TooLarge when (d*k)^(m+1) exceeds max_paths.

Matrix compute_eta_bar(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0,
                       int m, std::uint64_t max_paths = kDefaultEnumerationCap);

Matrix compute_phi(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0,
                   int m, std::uint64_t max_paths = kDefaultEnumerationCap);

Matrix compute_theta_bar(const CmcModel& model, const LoggingPolicy& policy,
                         const Distribution& d0, int m,
                         std::uint64_t max_paths = kDefaultEnumerationCap);

std::vector<Matrix> compute_gamma(const CmcModel& model, const LoggingPolicy& policy,
                                  const Distribution& d0, int m,
                                  std::uint64_t max_paths = kDefaultEnumerationCap);

// max_{1<=i<=m} (1 + sum_{j=i+1}^m eta_bar(i,j))
double delta_norm(const Matrix& eta_bar, int m);

// |Cov(f(Y_j), g(Y_i))| <= phi(i,j) * E|f - Ef| * ess sup|g| within 1e-10
// slack, with the exact joint law of (Y_i, Y_j). f and g are tables over the
// d*k pair indices.
bool check_covariance_inequality(const PathLaw& law, const std::vector<double>& f,
                                 const std::vector<double>& g, int i, int j, const Matrix& phi);

// All four coefficient families plus delta_norm in one report.
MixingReport compute_mixing_report(const CmcModel& model, const LoggingPolicy& policy,
                                   const Distribution& d0, int m,
                                   std::uint64_t max_paths = kDefaultEnumerationCap);

}  // namespace cmc
