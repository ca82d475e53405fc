#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "cmc/errors.hpp"
#include "cmc/estimate.hpp"
#include "cmc/linalg.hpp"
#include "cmc/model.hpp"
#include "cmc/ope.hpp"
#include "cmc/presets.hpp"
#include "cmc/rng.hpp"
#include "cmc/simulate.hpp"

using namespace cmc;

namespace {

Matrix random_stochastic(int d, Philox& rng) {
    Matrix M(d, d);
    for (int s = 0; s < d; ++s) {
        double sum = 0.0;
        for (int t = 0; t < d; ++t) {
            M(s, t) = 0.05 + rng.next_double();
            sum += M(s, t);
        }
        for (int t = 0; t < d; ++t) M(s, t) /= sum;
    }
    return M;
}

std::vector<double> random_costs(int d, Philox& rng) {
    std::vector<double> g(d);
    for (double& v : g) v = 2.0 * rng.next_double() - 1.0;
    return g;
}

}  // namespace

// ---------- value computation ----------

TEST_CASE("solve_value scalar and hand 2x2") {
    OpeProblem one;
    one.M = Matrix(1, 1, 1.0);
    one.g = {1.0};
    one.alpha = 0.5;
    CHECK(solve_value(one)[0] == doctest::Approx(2.0).epsilon(1e-12));

    OpeProblem two;
    two.M = Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}});
    two.g = {1.0, 2.0};
    two.alpha = 0.5;
    // (I - alpha M)^{-1} g worked by hand: det 0.4375, V = (18/7, 26/7).
    std::vector<double> V = solve_value(two);
    CHECK(V[0] == doctest::Approx(18.0 / 7.0).epsilon(1e-12));
    CHECK(V[1] == doctest::Approx(26.0 / 7.0).epsilon(1e-12));
    CHECK(bellman_residual(two, V) <= 1e-10);
}

TEST_CASE("solve_value agrees with the Neumann series") {
    Philox rng(0x5eed0001);
    OpeProblem p;
    p.M = random_stochastic(5, rng);
    p.g = random_costs(5, rng);
    p.alpha = 0.8;
    std::vector<double> V = solve_value(p);
    // sum_t alpha^t M^t g truncated far past double precision.
    std::vector<double> acc = p.g, term = p.g;
    for (int t = 1; t <= 250; ++t) {
        std::vector<double> next(5, 0.0);
        for (int s = 0; s < 5; ++s)
            for (int u = 0; u < 5; ++u) next[s] += p.M(s, u) * term[u];
        for (int s = 0; s < 5; ++s) {
            term[s] = next[s];
            acc[s] += std::pow(p.alpha, t) * term[s];
        }
    }
    for (int s = 0; s < 5; ++s) CHECK(V[s] == doctest::Approx(acc[s]).epsilon(1e-8));
}

TEST_CASE("residuals stay tiny across random problems") {
    Philox rng(0x5eed0002);
    for (int rep = 0; rep < 50; ++rep) {
        int d = 1 + static_cast<int>(rng.next_index(8));
        OpeProblem p;
        p.M = random_stochastic(d, rng);
        p.g = random_costs(d, rng);
        p.alpha = 0.1 + 0.8 * rng.next_double();
        CHECK(bellman_residual(p, solve_value(p)) <= 1e-10);
    }
}

TEST_CASE("value problem validation") {
    OpeProblem p;
    p.M = Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}});
    p.g = {1.0, 2.0};
    p.alpha = 1.0;
    CHECK_THROWS_AS(validate_ope_problem(p), InvalidParameter);
    p.alpha = 0.5;
    p.g = {1.0};
    CHECK_THROWS_AS(validate_ope_problem(p), DimensionMismatch);
    p.g = {1.0, 2.0};
    p.M(0, 0) = 0.6;
    CHECK_THROWS_AS(validate_ope_problem(p), RowSumError);
}

// ---------- perturbation bound ----------

TEST_CASE("perturbation bound closed form") {
    Matrix M = Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}});
    Matrix Mh = Matrix::from_rows({{0.55, 0.45}, {0.25, 0.75}});  // sup norm gap 0.1
    std::vector<double> g = {1.0, -2.0};                          // |g|_1 = 3
    // alpha sqrt(d) |diff| |g|_1 / (1-alpha)^2 = 0.5 sqrt(2) 0.1 3 / 0.25.
    CHECK(perturbation_bound(M, Mh, g, 0.5) ==
          doctest::Approx(0.6 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("perturbation bound dominates the actual value error") {
    Philox rng(0x5eed0003);
    for (int rep = 0; rep < 100; ++rep) {
        int d = 1 + static_cast<int>(rng.next_index(8));
        OpeProblem truth;
        truth.M = random_stochastic(d, rng);
        truth.g = random_costs(d, rng);
        truth.alpha = 0.1 + 0.8 * rng.next_double();
        OpeProblem plug = truth;
        plug.M = random_stochastic(d, rng);
        std::vector<double> V = solve_value(truth);
        std::vector<double> Vh = solve_value(plug);
        double gap = 0.0;
        for (int s = 0; s < d; ++s) gap = std::max(gap, std::abs(Vh[s] - V[s]));
        CHECK(gap <= perturbation_bound(truth.M, plug.M, truth.g, truth.alpha) + 1e-12);
    }
}

// ---------- policy composition ----------

TEST_CASE("compose_policy mixes rows and costs") {
    CmcModel model{2, 2,
                   {Matrix::from_rows({{0.9, 0.1}, {0.2, 0.8}}),
                    Matrix::from_rows({{0.4, 0.6}, {0.7, 0.3}})}};
    Matrix Pi = Matrix::from_rows({{0.3, 0.7}, {0.6, 0.4}});
    Matrix g_tilde = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    OpeProblem p = compose_policy(model, Pi, g_tilde, 0.5);
    CHECK(p.M(0, 0) == doctest::Approx(0.3 * 0.9 + 0.7 * 0.4).epsilon(1e-14));
    CHECK(p.M(0, 1) == doctest::Approx(0.3 * 0.1 + 0.7 * 0.6).epsilon(1e-14));
    CHECK(p.M(1, 0) == doctest::Approx(0.6 * 0.2 + 0.4 * 0.7).epsilon(1e-14));
    CHECK(p.M(1, 1) == doctest::Approx(0.6 * 0.8 + 0.4 * 0.3).epsilon(1e-14));
    CHECK(p.g[0] == doctest::Approx(0.3 * 1.0 + 0.7 * 2.0).epsilon(1e-14));
    CHECK(p.g[1] == doctest::Approx(0.6 * 3.0 + 0.4 * 4.0).epsilon(1e-14));
    CHECK(p.undefined_states.empty());
    CHECK_NOTHROW(validate_ope_problem(p));

    Matrix badPi = Matrix::from_rows({{0.5, 0.4}, {0.6, 0.4}});
    CHECK_THROWS_AS(compose_policy(model, badPi, g_tilde, 0.5), RowSumError);
}

TEST_CASE("compose_plug_in tracks reachable undefined rows") {
    EstimatedModel est;
    est.model = CmcModel{2, 2,
                         {Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                          Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})}};
    est.undefined_rows = {{0, 1}};
    Matrix g_tilde(2, 2, 1.0);

    // Pi never plays control 1 at state 0, so the hole is invisible.
    Matrix avoids = Matrix::from_rows({{1.0, 0.0}, {0.5, 0.5}});
    CHECK(compose_plug_in(est, avoids, g_tilde, 0.5).undefined_states.empty());

    Matrix hits = Matrix::from_rows({{0.4, 0.6}, {0.5, 0.5}});
    OpeProblem p = compose_plug_in(est, hits, g_tilde, 0.5);
    REQUIRE(p.undefined_states.size() == 1);
    CHECK(p.undefined_states[0] == 0);
}

TEST_CASE("plug_in_value two-argument form requires one control") {
    EstimatedModel single;
    single.model = CmcModel{2, 1, {Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}})}};
    std::vector<double> V = plug_in_value(single, {1.0, 2.0}, 0.5);
    CHECK(V[0] == doctest::Approx(18.0 / 7.0).epsilon(1e-12));
    CHECK(V[1] == doctest::Approx(26.0 / 7.0).epsilon(1e-12));

    EstimatedModel twoCtl;
    twoCtl.model = CmcModel{1, 2, {Matrix(1, 1, 1.0), Matrix(1, 1, 1.0)}};
    CHECK_THROWS_AS(plug_in_value(twoCtl, {1.0}, 0.5), DimensionMismatch);
}

// ---------- thresholds ----------

TEST_CASE("t_alpha closed form") {
    // |g|_1^2 d alpha^2 T / (1-alpha)^4 = 9 * 2 * 0.25 * 10 / 0.0625 = 720.
    CHECK(t_alpha({1.0, 2.0}, 2, 0.5, 10.0) == doctest::Approx(720.0).epsilon(1e-12));
    CHECK_THROWS_AS(t_alpha({1.0}, 1, 1.0, 10.0), InvalidParameter);
}

TEST_CASE("ope_sample_size rescales the accuracy target") {
    BoundInputs in;
    in.d = 3;
    in.k = 2;
    in.T = 10.0;
    in.zeta1 = 0.6;
    in.zeta2 = 0.2;
    in.C_delta = 3.0;
    in.eps = 0.15;
    in.delta = 0.05;
    std::vector<double> g = {1.0, 2.0, 0.5};
    const double alpha = 0.7;
    BoundInputs scaled = in;
    scaled.eps = in.eps * 0.09 / (3.5 * std::sqrt(3.0) * alpha);  // (1-alpha)^2 = 0.09
    CHECK(ope_sample_size(in, g, alpha) ==
          doctest::Approx(sample_size_hoeffding(scaled)).epsilon(1e-12));
    CHECK(ope_sample_size(in, g, alpha) > sample_size_hoeffding(in));
}

// ---------- greedy recovery ----------

TEST_CASE("greedy transform keeps exploration steps and masks the rest") {
    Trajectory traj;
    traj.states = {0, 1, 2, 1, 0};
    traj.controls = {1, 0, 1, 1, 0};
    traj.omega = {1, 1, 1, 1, 1};
    Trajectory kept = greedy_transform(traj, 3, 2, 99);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        CHECK(kept.states[i] == 3 + traj.states[i]);
        CHECK(kept.controls[i] == traj.controls[i]);
    }

    traj.omega = {0, 0, 0, 0, 0};
    Trajectory masked = greedy_transform(traj, 3, 2, 99);
    Trajectory again = greedy_transform(traj, 3, 2, 99);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        CHECK(masked.states[i] >= 0);
        CHECK(masked.states[i] < 3);  // fresh draws live in the unshifted copy
        CHECK(masked.controls[i] >= 0);
        CHECK(masked.controls[i] < 2);
        CHECK(masked.states[i] == again.states[i]);  // seed-deterministic
        CHECK(masked.controls[i] == again.controls[i]);
    }

    Trajectory bare;
    bare.states = {0, 1};
    bare.controls = {0, 0};
    CHECK_THROWS_AS(greedy_transform(bare, 3, 2, 99), MissingFlags);
}

TEST_CASE("masked draws are uniform") {
    Trajectory traj;
    const int n = 40000;
    traj.states.assign(n, 0);
    traj.controls.assign(n, 0);
    traj.omega.assign(n, 0);
    Trajectory masked = greedy_transform(traj, 4, 2, 0xabcdef);
    std::vector<int> state_count(4, 0);
    int ctl1 = 0;
    for (int i = 0; i < n; ++i) {
        ++state_count[masked.states[i]];
        ctl1 += masked.controls[i];
    }
    for (int s = 0; s < 4; ++s)
        CHECK(std::abs(state_count[s] - n / 4.0) < 4.0 * std::sqrt(n * 0.25 * 0.75));
    CHECK(std::abs(ctl1 - n / 2.0) < 4.0 * std::sqrt(n * 0.25));
}

TEST_CASE("recover_greedy_M inverts an exactly assembled augmented model") {
    const double upsilon = 0.3;
    Matrix truth = Matrix::from_rows({{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.1, 0.1, 0.8}});
    CmcModel aug;
    aug.d = 6;
    aug.k = 1;
    Matrix A(6, 6);
    for (int s = 0; s < 6; ++s) {
        // Top rows are irrelevant to recovery; park them on a self loop.
        if (s < 3) {
            A(s, s) = 1.0;
            continue;
        }
        for (int t = 0; t < 3; ++t) A(s, t) = (1.0 - upsilon) / 3.0;
        for (int t = 0; t < 3; ++t) A(s, 3 + t) = upsilon * truth(s - 3, t);
    }
    aug.matrices.push_back(A);

    GreedyRecovery rec = recover_greedy_M(aug, upsilon);
    CHECK(rec.flagged_rows.empty());
    CHECK(sup_norm_diff(rec.model.matrices[0], truth) <= 1e-12);
    CHECK(sup_norm_diff(rec.raw[0], truth) <= 1e-12);

    // Wrong upsilon: raw rows sum to 0.3/0.5 = 0.6, so every row is flagged,
    // but renormalization still restores the truth.
    GreedyRecovery off = recover_greedy_M(aug, 0.5);
    CHECK(off.flagged_rows.size() == 3);
    CHECK(sup_norm_diff(off.model.matrices[0], truth) <= 1e-12);

    CHECK_THROWS_AS(recover_greedy_M(aug, 0.0), InvalidUpsilon);
    CHECK_THROWS_AS(recover_greedy_M(aug, 1.0), InvalidUpsilon);
    CmcModel odd{3, 1, {Matrix(3, 3, 1.0 / 3.0)}};
    CHECK_THROWS_AS(recover_greedy_M(odd, 0.3), DimensionMismatch);
}

TEST_CASE("no-data augmented rows fall back to uniform and get flagged") {
    CmcModel aug;
    aug.d = 4;
    aug.k = 1;
    Matrix A(4, 4);
    A(0, 0) = A(1, 1) = 1.0;
    A(2, 0) = 0.7;
    A(2, 2) = 0.3 * 0.4;
    A(2, 3) = 0.3 * 0.6;
    A(3, 0) = 1.0;  // row 3 keeps all its mass outside the bottom-right block
    aug.matrices = {A};
    GreedyRecovery rec = recover_greedy_M(aug, 0.3);
    CHECK(rec.model.matrices[0](0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rec.model.matrices[0](0, 1) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(rec.model.matrices[0](1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rec.model.matrices[0](1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(rec.flagged_rows.size() == 1);
    CHECK(rec.flagged_rows[0] == std::pair<int, int>(1, 0));
}

TEST_CASE("greedy pipeline recovers the model from logged exploration") {
    Preset p = get_preset("greedy-3x2");
    const auto* greedy = std::get_if<Greedy>(&p.policy.v);
    REQUIRE(greedy != nullptr);
    const double upsilon = greedy->upsilon;
    const int m = 400000;
    Trajectory traj = simulate(p.model, p.policy, p.d0, m, 20240802);
    REQUIRE(traj.omega.size() == traj.states.size());
    Trajectory aug = greedy_transform(traj, 3, 2, derive_child_seed(20240802, 1));
    EstimatedModel est = estimate(count(aug, 6, 2));
    GreedyRecovery rec = recover_greedy_M(est.model, upsilon);
    double err = 0.0;
    for (int l = 0; l < 2; ++l)
        err = std::max(err, sup_norm_diff(rec.model.matrices[l], p.model.matrices[l]));
    CHECK(err < 0.05);
    // Exploration steps land in the top copy uniformly: estimated mass
    // (1 - upsilon)/d on each top-left column.
    for (int l = 0; l < 2; ++l)
        for (int s = 3; s < 6; ++s)
            for (int t = 0; t < 3; ++t)
                CHECK(est.model.matrices[l](s, t) ==
                      doctest::Approx((1.0 - upsilon) / 3.0).epsilon(0.15));
}
