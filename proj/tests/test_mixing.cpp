#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>
#include <vector>

#include "cmc/errors.hpp"
#include "cmc/mixing.hpp"
#include "cmc/policies.hpp"
#include "cmc/presets.hpp"
#include "cmc/rng.hpp"

using cmc::CmcModel;
using cmc::Distribution;
using cmc::LoggingPolicy;
using cmc::Matrix;
using Rat = boost::multiprecision::cpp_rational;

namespace {

// ---------- exact-arithmetic reference ----------
// Reimplements the coefficient definitions from scratch over rationals, with
// the TV sup computed by literally enumerating event subsets (when the atom
// count permits), so the production TV shortcut is itself under test.

struct RatProcess {
    int P = 0;  // pair count d*k
    int d = 0, k = 0;
    int m = 0;
    std::vector<Rat> init;               // P
    std::vector<std::vector<Rat>> step;  // P x P

    std::vector<std::vector<int>> paths;
    std::vector<Rat> prob;

    void enumerate() {
        long total = 1;
        for (int t = 0; t <= m; ++t) total *= P;
        for (long code = 0; code < total; ++code) {
            std::vector<int> path(m + 1);
            long c = code;
            for (int t = m; t >= 0; --t) {
                path[t] = static_cast<int>(c % P);
                c /= P;
            }
            Rat pr = init[path[0]];
            for (int t = 0; t < m; ++t) pr *= step[path[t]][path[t + 1]];
            if (pr != 0) {
                paths.push_back(path);
                prob.push_back(pr);
            }
        }
    }

    long encode(const std::vector<int>& path, int from, int to_incl) const {
        long code = 0;
        for (int t = from; t <= to_incl; ++t) code = code * P + path[t];
        return code;
    }
};

// sup over event subsets T of |q1(T) - q2(T)| for two normalized laws given
// as atom -> mass maps. Enumerates all 2^B subsets of the joint support when
// B <= 14; otherwise falls back to the positive-part sum (the identity the
// small cases verify exhaustively).
Rat subset_sup(const std::map<long, Rat>& q1, const std::map<long, Rat>& q2) {
    std::vector<Rat> diff;
    for (const auto& [atom, v] : q1) {
        auto it = q2.find(atom);
        diff.push_back(v - (it == q2.end() ? Rat(0) : it->second));
    }
    for (const auto& [atom, v] : q2)
        if (q1.find(atom) == q1.end()) diff.push_back(-v);
    const int B = static_cast<int>(diff.size());
    if (B <= 14) {
        Rat best = 0;
        for (uint32_t mask = 0; mask < (1u << B); ++mask) {
            Rat s = 0;
            for (int b = 0; b < B; ++b)
                if (mask >> b & 1u) s += diff[b];
            if (s < 0) s = -s;
            if (s > best) best = s;
        }
        return best;
    }
    Rat pos = 0;
    for (const Rat& v : diff)
        if (v > 0) pos += v;
    return pos;
}

Rat oracle_eta(const RatProcess& pr, int i, int j) {
    // conditioning events: (pairs 0..i-1, y_i); laws over blocks (pairs j..m)
    std::map<long, Rat> mass;
    std::map<long, std::map<long, Rat>> tails;
    for (size_t idx = 0; idx < pr.paths.size(); ++idx) {
        long ev = pr.encode(pr.paths[idx], 0, i);
        long block = pr.encode(pr.paths[idx], j, pr.m);
        mass[ev] += pr.prob[idx];
        tails[ev][block] += pr.prob[idx];
    }
    Rat best = 0;
    for (auto it1 = mass.begin(); it1 != mass.end(); ++it1)
        for (auto it2 = std::next(it1); it2 != mass.end(); ++it2) {
            std::map<long, Rat> q1 = tails[it1->first], q2 = tails[it2->first];
            for (auto& [a, v] : q1) v /= it1->second;
            for (auto& [a, v] : q2) v /= it2->second;
            Rat s = subset_sup(q1, q2);
            if (s > best) best = s;
        }
    return best;
}

Rat oracle_phi(const RatProcess& pr, int i, int j) {
    std::map<long, Rat> mass;
    std::map<long, std::map<long, Rat>> tails;
    std::map<long, Rat> uncond;
    for (size_t idx = 0; idx < pr.paths.size(); ++idx) {
        long h = pr.encode(pr.paths[idx], 0, i);
        long block = pr.encode(pr.paths[idx], j, pr.m);
        mass[h] += pr.prob[idx];
        tails[h][block] += pr.prob[idx];
        uncond[block] += pr.prob[idx];
    }
    Rat best = 0;
    for (const auto& [h, mu] : mass) {
        std::map<long, Rat> q = tails[h];
        for (auto& [a, v] : q) v /= mu;
        Rat s = subset_sup(q, uncond);
        if (s > best) best = s;
    }
    return best;
}

Rat oracle_theta(const RatProcess& pr, int i, int j) {
    std::vector<Rat> mass(pr.P, Rat(0));
    std::vector<std::vector<Rat>> joint(pr.P, std::vector<Rat>(pr.d, Rat(0)));
    for (size_t idx = 0; idx < pr.paths.size(); ++idx) {
        int y = pr.paths[idx][i];
        mass[y] += pr.prob[idx];
        joint[y][pr.paths[idx][j] / pr.k] += pr.prob[idx];
    }
    Rat best = 0;
    for (int y1 = 0; y1 < pr.P; ++y1) {
        if (mass[y1] == 0) continue;
        for (int y2 = y1 + 1; y2 < pr.P; ++y2) {
            if (mass[y2] == 0) continue;
            std::map<long, Rat> q1, q2;
            for (int t = 0; t < pr.d; ++t) {
                if (joint[y1][t] != 0) q1[t] = joint[y1][t] / mass[y1];
                if (joint[y2][t] != 0) q2[t] = joint[y2][t] / mass[y2];
            }
            Rat s = subset_sup(q1, q2);
            if (s > best) best = s;
        }
    }
    return best;
}

double to_d(const Rat& r) { return r.convert_to<double>(); }

void compare_tables(const RatProcess& pr, const Matrix& eta, const Matrix& phi,
                    const Matrix& theta) {
    for (int i = 0; i < pr.m; ++i)
        for (int j = i + 1; j <= pr.m; ++j) {
            CAPTURE(i);
            CAPTURE(j);
            CHECK(std::abs(eta(i, j) - to_d(oracle_eta(pr, i, j))) < 1e-12);
            CHECK(std::abs(phi(i, j) - to_d(oracle_phi(pr, i, j))) < 1e-12);
            CHECK(std::abs(theta(i, j) - to_d(oracle_theta(pr, i, j))) < 1e-12);
        }
}

bool defined(double v) { return !std::isnan(v); }

void check_sandwich(const cmc::MixingReport& rep) {
    for (int i = 0; i < rep.m; ++i)
        for (int j = i + 1; j <= rep.m; ++j) {
            CAPTURE(i);
            CAPTURE(j);
            REQUIRE(defined(rep.eta_bar(i, j)));
            REQUIRE(defined(rep.phi(i, j)));
            CHECK(rep.phi(i, j) <= rep.eta_bar(i, j) + 1e-10);
            CHECK(rep.eta_bar(i, j) <= 2.0 * rep.phi(i, j) + 1e-10);
        }
}

void check_eta_theta_gamma_lemma(const cmc::MixingReport& rep) {
    // eta_bar(i,j) <= 2 sum_{p=j}^m gamma[p](i, j-i) + theta_bar(i,j)
    for (int i = 0; i < rep.m; ++i)
        for (int j = i + 1; j <= rep.m; ++j) {
            double tail = 0.0;
            for (int p = j; p <= rep.m; ++p) {
                REQUIRE(defined(rep.gamma[p](i, j - i)));
                tail += rep.gamma[p](i, j - i);
            }
            CAPTURE(i);
            CAPTURE(j);
            CHECK(rep.eta_bar(i, j) <= 2.0 * tail + rep.theta_bar(i, j) + 1e-10);
        }
}

}  // namespace

TEST_CASE("coefficients match the exact-arithmetic reference, d=2 k=1") {
    RatProcess pr;
    pr.P = 2;
    pr.d = 2;
    pr.k = 1;
    pr.m = 3;
    pr.init = {Rat(1, 3), Rat(2, 3)};
    pr.step = {{Rat(1, 2), Rat(1, 2)}, {Rat(1, 4), Rat(3, 4)}};
    pr.enumerate();

    CmcModel model;
    model.d = 2;
    model.k = 1;
    model.matrices = {Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}})};
    LoggingPolicy pol = cmc::make_stationary_policy(Matrix::from_rows({{1.0}, {1.0}}));
    Distribution d0{{1.0 / 3.0, 2.0 / 3.0}};

    Matrix eta = cmc::compute_eta_bar(model, pol, d0, pr.m);
    Matrix phi = cmc::compute_phi(model, pol, d0, pr.m);
    Matrix theta = cmc::compute_theta_bar(model, pol, d0, pr.m);
    compare_tables(pr, eta, phi, theta);

    // NaN outside the defined range
    CHECK(std::isnan(eta(2, 1)));
    CHECK(std::isnan(eta(1, 1)));
    CHECK(std::isnan(phi(3, 3)));
}

TEST_CASE("coefficients match the exact-arithmetic reference, d=2 k=2") {
    // states x controls with a randomized stationary policy
    RatProcess pr;
    pr.P = 4;
    pr.d = 2;
    pr.k = 2;
    pr.m = 2;
    std::vector<std::vector<Rat>> M0 = {{Rat(1, 2), Rat(1, 2)}, {Rat(1, 4), Rat(3, 4)}};
    std::vector<std::vector<Rat>> M1 = {{Rat(2, 3), Rat(1, 3)}, {Rat(1, 10), Rat(9, 10)}};
    std::vector<std::vector<Rat>> Pp = {{Rat(3, 5), Rat(2, 5)}, {Rat(1, 2), Rat(1, 2)}};
    pr.init.assign(4, Rat(0));
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) pr.init[x * 2 + a] = Rat(1, 2) * Pp[x][a];
    pr.step.assign(4, std::vector<Rat>(4, Rat(0)));
    for (int s = 0; s < 2; ++s)
        for (int l = 0; l < 2; ++l)
            for (int t = 0; t < 2; ++t)
                for (int l2 = 0; l2 < 2; ++l2)
                    pr.step[s * 2 + l][t * 2 + l2] = (l == 0 ? M0 : M1)[s][t] * Pp[t][l2];
    pr.enumerate();

    CmcModel model;
    model.d = 2;
    model.k = 2;
    model.matrices = {Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}}),
                      Matrix::from_rows({{2.0 / 3.0, 1.0 / 3.0}, {0.1, 0.9}})};
    LoggingPolicy pol = cmc::make_stationary_policy(Matrix::from_rows({{0.6, 0.4}, {0.5, 0.5}}));
    Distribution d0{{0.3, 0.2, 0.25, 0.25}};

    Matrix eta = cmc::compute_eta_bar(model, pol, d0, pr.m);
    Matrix phi = cmc::compute_phi(model, pol, d0, pr.m);
    Matrix theta = cmc::compute_theta_bar(model, pol, d0, pr.m);
    compare_tables(pr, eta, phi, theta);
}

TEST_CASE("periodic counter-example chain: theta = 1, phi = 1/2, eta = 1") {
    const cmc::Preset p = cmc::get_preset("parity-counterexample");
    const int m = 3;
    cmc::MixingReport rep = cmc::compute_mixing_report(p.model, p.policy, p.d0, m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j <= m; ++j) {
            CAPTURE(i);
            CAPTURE(j);
            CHECK(rep.theta_bar(i, j) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(rep.phi(i, j) == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(rep.eta_bar(i, j) == doctest::Approx(1.0).epsilon(1e-12));
        }
    check_sandwich(rep);
    check_eta_theta_gamma_lemma(rep);
}

TEST_CASE("iid construction: everything vanishes") {
    const cmc::Preset p = cmc::get_preset("uniform-2x2");
    cmc::MixingReport rep = cmc::compute_mixing_report(p.model, p.policy, p.d0, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j <= 3; ++j) {
            CHECK(rep.eta_bar(i, j) <= 1e-12);
            CHECK(rep.phi(i, j) <= 1e-12);
            CHECK(rep.theta_bar(i, j) <= 1e-12);
        }
    CHECK(rep.delta_norm == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sandwich and collapse lemma across the policy classes") {
    struct Case {
        const char* preset;
        int m;
    };
    for (const Case& c : {Case{"stationary-3x2", 3}, Case{"nonuniform-2x2", 4},
                          Case{"schedule-2x2", 4}, Case{"markov-2x2", 4},
                          Case{"episodic-2x2", 4}, Case{"greedy-3x2", 3},
                          Case{"aperiodic-trio", 3}}) {
        CAPTURE(c.preset);
        const cmc::Preset p = cmc::get_preset(c.preset);
        cmc::MixingReport rep = cmc::compute_mixing_report(p.model, p.policy, p.d0, c.m);
        check_sandwich(rep);
        check_eta_theta_gamma_lemma(rep);
        // control laws ignore remote history in every shipped class
        for (int i = 0; i <= c.m; ++i)
            for (int jo = 1; i + jo <= c.m; ++jo)
                for (int pp = i + jo; pp <= c.m; ++pp) {
                    REQUIRE(defined(rep.gamma[pp](i, jo)));
                    CHECK(rep.gamma[pp](i, jo) <= 1e-12);
                }
    }
}

TEST_CASE("delta_norm formula on a hand table") {
    Matrix eta(4, 4, 0.0);
    eta(1, 2) = 0.5;
    eta(1, 3) = 0.25;
    eta(2, 3) = 0.125;
    CHECK(cmc::delta_norm(eta, 3) == doctest::Approx(1.75));
    CHECK_THROWS_AS(cmc::delta_norm(eta, 0), cmc::InvalidParameter);
    CHECK_THROWS_AS(cmc::delta_norm(eta, 9), cmc::InvalidParameter);
}

TEST_CASE("delta_norm stays under the class constant budget") {
    // matrix-difference norm bound: delta_norm <= 1 + C + C_theta
    for (const char* name : {"stationary-3x2", "schedule-2x2", "episodic-2x2", "greedy-3x2"}) {
        CAPTURE(name);
        const cmc::Preset p = cmc::get_preset(name);
        REQUIRE(p.has_constants);
        cmc::MixingReport rep = cmc::compute_mixing_report(p.model, p.policy, p.d0, 3);
        CHECK(rep.delta_norm <= 1.0 + p.constants.C + p.constants.C_theta + 1e-9);
    }
}

TEST_CASE("theta decays geometrically under a column floor") {
    // single-control chain with strictly positive entries: theta(i,j) bounded
    // by (1 - d * M_min)^(j-i-1)
    CmcModel model;
    model.d = 2;
    model.k = 1;
    model.matrices = {Matrix::from_rows({{0.6, 0.4}, {0.3, 0.7}})};
    LoggingPolicy pol = cmc::make_stationary_policy(Matrix::from_rows({{1.0}, {1.0}}));
    Distribution d0{{0.5, 0.5}};
    const int m = 5;
    Matrix theta = cmc::compute_theta_bar(model, pol, d0, m);
    const double ratio = 1.0 - 2 * 0.3;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j <= m; ++j)
            CHECK(theta(i, j) <= std::pow(ratio, j - i - 1) + 1e-12);
    // one-step TV equals the Dobrushin coefficient here
    CHECK(theta(0, 1) == doctest::Approx(cmc::dobrushin_coefficient(model.matrices[0])));
}

TEST_CASE("covariance inequality holds for random functionals") {
    const cmc::Preset p = cmc::get_preset("nonuniform-2x2");
    const int m = 3;
    cmc::PathLaw law(p.model, p.policy, p.d0, m);
    Matrix phi = cmc::compute_phi(p.model, p.policy, p.d0, m);
    cmc::Philox rng(2024);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> f(4), g(4);
        for (double& v : f) v = 2.0 * rng.next_double() - 1.0;
        for (double& v : g) v = 2.0 * rng.next_double() - 1.0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j <= m; ++j) {
                CAPTURE(rep);
                CAPTURE(i);
                CAPTURE(j);
                CHECK(cmc::check_covariance_inequality(law, f, g, i, j, phi));
            }
    }
}

TEST_CASE("covariance inequality on the counter-example half indicator") {
    const cmc::Preset p = cmc::get_preset("parity-counterexample");
    const int m = 3;
    cmc::PathLaw law(p.model, p.policy, p.d0, m);
    Matrix phi = cmc::compute_phi(p.model, p.policy, p.d0, m);
    // f = g = indicator of the first half, as tables over the 8 pairs
    std::vector<double> f(8, 0.0);
    for (int pr = 0; pr < 8; ++pr)
        if (cmc::pair_state(pr, 2) <= 1) f[pr] = 1.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j <= m; ++j) CHECK(cmc::check_covariance_inequality(law, f, f, i, j, phi));
}

TEST_CASE("enumeration cap is enforced") {
    const cmc::Preset p = cmc::get_preset("nonuniform-2x2");
    CHECK_THROWS_AS(cmc::compute_eta_bar(p.model, p.policy, p.d0, 3, /*max_paths=*/100),
                    cmc::TooLarge);
    CHECK_THROWS_AS(cmc::compute_mixing_report(p.model, p.policy, p.d0, 12), cmc::TooLarge);
}

TEST_CASE("report bundles the standalone computations") {
    const cmc::Preset p = cmc::get_preset("nonuniform-2x2");
    const int m = 3;
    cmc::MixingReport rep = cmc::compute_mixing_report(p.model, p.policy, p.d0, m);
    Matrix eta = cmc::compute_eta_bar(p.model, p.policy, p.d0, m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j <= m; ++j) CHECK(rep.eta_bar(i, j) == eta(i, j));
    CHECK(rep.delta_norm == doctest::Approx(cmc::delta_norm(eta, m)));
    CHECK(rep.d == 2);
    CHECK(rep.k == 2);
    CHECK(rep.m == m);
    CHECK(static_cast<int>(rep.gamma.size()) == m + 1);
}
