#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#ifdef HAVE_EIGEN
#include <Eigen/Dense>
#endif

#include "cmc/errors.hpp"
#include "cmc/model.hpp"
#include "cmc/presets.hpp"
#include "cmc/rng.hpp"

using cmc::CmcModel;
using cmc::Matrix;

namespace {

CmcModel two_by_two() {
    CmcModel m;
    m.d = 2;
    m.k = 2;
    m.matrices = {Matrix::from_rows({{0.7, 0.3}, {0.2, 0.8}}),
                  Matrix::from_rows({{0.4, 0.6}, {0.9, 0.1}})};
    return m;
}

}  // namespace

TEST_CASE("pair flattening round trip") {
    const int d = 5, k = 3;
    for (int s = 0; s < d; ++s)
        for (int l = 0; l < k; ++l) {
            int p = cmc::pair_index(s, l, k);
            CHECK(cmc::pair_state(p, k) == s);
            CHECK(cmc::pair_control(p, k) == l);
        }
    CHECK(cmc::pair_index(2, 1, 3) == 7);
}

TEST_CASE("validate_model accepts stochastic input") {
    CHECK_NOTHROW(cmc::validate_model(two_by_two()));
}

TEST_CASE("validate_model rejects a bad row sum") {
    CmcModel m;
    m.d = 2;
    m.k = 1;
    m.matrices = {Matrix::from_rows({{0.5, 0.6}, {0.5, 0.5}})};
    CHECK_THROWS_AS(cmc::validate_model(m), cmc::RowSumError);
}

TEST_CASE("validate_model rejects negative entries") {
    CmcModel m;
    m.d = 2;
    m.k = 1;
    m.matrices = {Matrix::from_rows({{1.2, -0.2}, {0.5, 0.5}})};
    CHECK_THROWS_AS(cmc::validate_model(m), cmc::NegativeEntryError);
}

TEST_CASE("validate_model rejects shape mismatches") {
    CmcModel m;
    m.d = 2;
    m.k = 2;
    m.matrices = {Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})};
    CHECK_THROWS_AS(cmc::validate_model(m), cmc::DimensionMismatch);
}

TEST_CASE("paired chain entries by hand") {
    // ((s,l),(t,l')) = M^(l)[s,t] * P[t,l']
    CmcModel m = two_by_two();
    Matrix P = Matrix::from_rows({{0.6, 0.4}, {0.3, 0.7}});
    Matrix Q = cmc::paired_chain(m, P);
    REQUIRE(Q.rows == 4);
    REQUIRE(Q.cols == 4);
    // (s=0,l=0) -> (t=1,l'=1): M^(0)[0,1] * P[1,1] = 0.3 * 0.7
    CHECK(Q(cmc::pair_index(0, 0, 2), cmc::pair_index(1, 1, 2)) == doctest::Approx(0.21));
    // (s=1,l=1) -> (t=0,l'=0): M^(1)[1,0] * P[0,0] = 0.9 * 0.6
    CHECK(Q(cmc::pair_index(1, 1, 2), cmc::pair_index(0, 0, 2)) == doctest::Approx(0.54));
    for (int p = 0; p < 4; ++p) CHECK(Q.row_sum(p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution fixed point") {
    Matrix M = Matrix::from_rows({{0.7, 0.3}, {0.4, 0.6}});
    cmc::Distribution pi = cmc::stationary_distribution(M);
    CHECK(pi.w[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-9));
    CHECK(pi.w[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-9));
}

#ifdef HAVE_EIGEN
TEST_CASE("stationary distribution matches an eigen-solver oracle") {
    // Random 8-state stochastic matrix; compare the power-iteration fixed point
    // with the left eigenvector of eigenvalue 1 from a dense eigensolver.
    cmc::Philox rng(99);
    const int d = 8;
    Matrix M(d, d);
    for (int s = 0; s < d; ++s) {
        double sum = 0.0;
        for (int t = 0; t < d; ++t) {
            M(s, t) = 0.05 + rng.next_double();
            sum += M(s, t);
        }
        for (int t = 0; t < d; ++t) M(s, t) /= sum;
    }
    cmc::Distribution pi = cmc::stationary_distribution(M);

    Eigen::MatrixXd E(d, d);
    for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) E(s, t) = M(s, t);
    Eigen::EigenSolver<Eigen::MatrixXd> es(E.transpose());
    int best = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(es.eigenvalues()[i].real() - 1.0) <
            std::abs(es.eigenvalues()[best].real() - 1.0))
            best = i;
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    double sum = v.sum();
    for (int s = 0; s < d; ++s) CHECK(pi.w[s] == doctest::Approx(v[s] / sum).epsilon(1e-8));
}
#endif

TEST_CASE("presets all validate") {
    for (const std::string& name : cmc::preset_names()) {
        const cmc::Preset p = cmc::get_preset(name);
        CHECK_NOTHROW(cmc::validate_model(p.model));
        CHECK(p.d0.size() == p.model.d * p.model.k);
        double mass = 0.0;
        for (double w : p.d0.w) {
            CHECK(w >= -1e-15);
            mass += w;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("unknown preset raises a config error") {
    CHECK_THROWS_AS(cmc::get_preset("no-such-preset"), cmc::ConfigError);
}
