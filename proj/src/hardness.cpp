#include "cmc/hardness.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <thread>

#include "cmc/errors.hpp"
#include "cmc/rng.hpp"

namespace cmc {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidParameter(msg);
}

void check_sigma_params(const PerturbedFamilyParams& p) {
    require(p.d >= 2 && p.d % 2 == 0, "sigma family needs even d >= 2");
    require(p.p_star > 0.0 && p.p_star < 1.0 / (p.d + 1), "p_star must lie in (0, 1/(d+1))");
    require(p.eps >= 0.0 && p.eps < 1.0 / 32.0, "eps must lie in [0, 1/32)");
    require(static_cast<int>(p.sigma.size()) == p.d / 2, "sigma must have length d/2");
    for (int s : p.sigma) require(s == 1 || s == -1, "sigma entries must be +-1");
}

void check_block_params(const PerturbedFamilyParams& p) {
    require(p.d >= 3 && p.d % 3 == 0, "block family needs d divisible by 3");
    require(p.k >= 1, "need k >= 1 controls");
    require(p.iota > 0.0 && p.iota < 31.0 / 64.0, "iota must lie in (0, 31/64)");
    require(p.eps >= 0.0 && p.eps < 1.0 / 32.0, "eps must lie in [0, 1/32)");
    require(static_cast<int>(p.xi.size()) == p.k, "xi must hold one vector per control");
    for (const auto& row : p.xi) {
        require(static_cast<int>(row.size()) == p.d / 3, "each xi vector must have length d/3");
        for (int x : row) require(x == 1 || x == 0 || x == -1, "xi entries must be in {-1,0,+1}");
    }
}

}  // namespace

// ---------- sigma family ----------

CmcModel build_sigma_instance(const PerturbedFamilyParams& params) {
    check_sigma_params(params);
    const int d = params.d;
    const int n = d + 1;
    CmcModel model;
    model.d = n;
    model.k = 1;
    Matrix M(n, n);
    const double body = (1.0 - params.p_star) / d;
    for (int s = 0; s < d; ++s) {
        for (int t = 0; t < d; ++t) M(s, t) = body;
        M(s, d) = params.p_star;
    }
    for (int i = 0; i < d / 2; ++i) {
        const double bump = 16.0 * params.sigma[i] * params.eps / d;
        M(d, 2 * i) = body + bump;
        M(d, 2 * i + 1) = body - bump;
    }
    M(d, d) = params.p_star;
    model.matrices.push_back(std::move(M));
    validate_model(model);
    return model;
}

std::vector<double> sigma_stationary(const PerturbedFamilyParams& params) {
    check_sigma_params(params);
    const int d = params.d;
    const double q = 1.0 - params.p_star;
    // pi_t = (q^2 + p* q +- 16 p* sigma_i eps)/d, pi_d = p*.
    std::vector<double> pi(d + 1);
    for (int i = 0; i < d / 2; ++i) {
        const double bump = 16.0 * params.p_star * params.sigma[i] * params.eps;
        pi[2 * i] = (q * q + params.p_star * q + bump) / d;
        pi[2 * i + 1] = (q * q + params.p_star * q - bump) / d;
    }
    pi[d] = params.p_star;
    return pi;
}

// ---------- block family ----------

namespace {

// Shared body of the block builder and its stationary laws, with xi as reals
// so the control-averaged chain reuses it.
Matrix block_matrix(int d, double iota, double eps, const std::vector<double>& xi) {
    const int b = d / 3;
    Matrix M(d, d);
    for (int s = 0; s < d; ++s)
        for (int t = 0; t < b; ++t) M(s, t) = 3.0 * iota / d;
    for (int i = 0; i < b; ++i) {
        // Pair mass: (1 +- xi eps - 2 iota)/2, except d = 3 where the off
        // terms vanish and the pair absorbs the extra iota.
        const double base = (d == 3) ? 1.0 - iota : 1.0 - 2.0 * iota;
        if (d > 3) {
            const double off = 3.0 * iota / (2.0 * (d - 3));
            for (int t = b; t < d; ++t) M(i, t) = off;
        }
        M(i, b + 2 * i) = (base + xi[i] * eps) / 2.0;
        M(i, b + 2 * i + 1) = (base - xi[i] * eps) / 2.0;
    }
    for (int s = b; s < d; ++s) M(s, s) = 1.0 - iota;
    return M;
}

std::vector<double> block_stationary_real(int d, double iota, double eps,
                                          const std::vector<double>& xi) {
    const int b = d / 3;
    std::vector<double> pi(d);
    for (int t = 0; t < b; ++t) pi[t] = 3.0 * iota / d;
    for (int i = 0; i < b; ++i) {
        pi[b + 2 * i] = 3.0 * (1.0 + xi[i] * eps - iota) / (2.0 * d);
        pi[b + 2 * i + 1] = 3.0 * (1.0 - xi[i] * eps - iota) / (2.0 * d);
    }
    return pi;
}

}  // namespace

CmcModel build_block_instance(const PerturbedFamilyParams& params) {
    check_block_params(params);
    CmcModel model;
    model.d = params.d;
    model.k = params.k;
    for (int l = 0; l < params.k; ++l) {
        std::vector<double> xi(params.xi[l].begin(), params.xi[l].end());
        model.matrices.push_back(block_matrix(params.d, params.iota, params.eps, xi));
    }
    validate_model(model);
    return model;
}

std::vector<double> block_stationary(const PerturbedFamilyParams& params, int control) {
    check_block_params(params);
    require(control >= 0 && control < params.k, "control index out of range");
    std::vector<double> xi(params.xi[control].begin(), params.xi[control].end());
    return block_stationary_real(params.d, params.iota, params.eps, xi);
}

Distribution block_pair_stationary(const PerturbedFamilyParams& params) {
    check_block_params(params);
    const int b = params.d / 3;
    std::vector<double> xi_bar(b, 0.0);
    for (int l = 0; l < params.k; ++l)
        for (int i = 0; i < b; ++i) xi_bar[i] += params.xi[l][i];
    for (double& v : xi_bar) v /= params.k;
    // Under uniform controls the state chain follows the control-averaged
    // matrix, whose stationary law is the closed form at the mean xi; the
    // control coordinate is uniform and independent.
    std::vector<double> nu = block_stationary_real(params.d, params.iota, params.eps, xi_bar);
    Distribution d0;
    d0.w.assign(static_cast<size_t>(params.d) * params.k, 0.0);
    for (int s = 0; s < params.d; ++s)
        for (int l = 0; l < params.k; ++l) d0.w[pair_index(s, l, params.k)] = nu[s] / params.k;
    validate_distribution(d0);
    return d0;
}

LoggingPolicy block_uniform_policy(int d, int k) {
    require(d >= 1 && k >= 1, "need d >= 1 and k >= 1");
    Matrix P(d, k);
    for (int s = 0; s < d; ++s)
        for (int l = 0; l < k; ++l) P(s, l) = 1.0 / k;
    return make_stationary_policy(std::move(P));
}

// ---------- code sets ----------

GvSet gilbert_varshamov_set(int n, int min_dist) {
    require(n >= 2, "code length must be >= 2");
    require(min_dist >= 1 && min_dist <= n, "min_dist must lie in [1, n]");
    if (n > 24) throw TooLarge("codeword scan needs 2^n masks; n > 24 unsupported");
    GvSet out;
    out.target = std::pow(2.0, n / 8.0);
    const auto want = static_cast<size_t>(std::ceil(out.target));
    std::vector<uint32_t> masks;
    const uint32_t limit = 1u << n;
    for (uint32_t m = 0; m < limit && masks.size() < want; ++m) {
        bool ok = true;
        for (uint32_t prev : masks) {
            if (std::popcount(m ^ prev) < min_dist) {
                ok = false;
                break;
            }
        }
        if (ok) masks.push_back(m);
    }
    for (uint32_t m : masks) {
        std::vector<int> word(n);
        for (int i = 0; i < n; ++i) word[i] = (m >> i) & 1u ? 1 : -1;
        out.codewords.push_back(std::move(word));
    }
    out.target_met = static_cast<double>(out.codewords.size()) >= out.target;
    return out;
}

// ---------- touring ----------

TouringTime touring_time(const Trajectory& traj, int d, int k) {
    require(d >= 3 && d % 3 == 0, "touring needs d divisible by 3");
    require(k >= 1, "need k >= 1");
    require(traj.states.size() == traj.controls.size() && !traj.states.empty(),
            "trajectory must hold aligned states and controls");
    const int b = d / 3;
    TouringTime out;
    out.pairs_required = b * k;
    std::vector<uint8_t> seen(static_cast<size_t>(b) * k, 0);
    int remaining = out.pairs_required;
    const int m = traj.m();
    for (int i = 1; i <= m; ++i) {
        const int x = traj.states[i];
        const int a = traj.controls[i];
        require(x >= 0 && x < d && a >= 0 && a < k, "trajectory entry out of range");
        if (x < b) {
            uint8_t& flag = seen[static_cast<size_t>(x) * k + a];
            if (!flag) {
                flag = 1;
                if (--remaining == 0) {
                    out.value = i;
                    break;
                }
            }
        }
    }
    return out;
}

CoverTimeResult cover_time_experiment(const PerturbedFamilyParams& params, int64_t n,
                                      int replications, uint64_t seed, int threads) {
    check_block_params(params);
    require(n >= 0, "horizon must be >= 0");
    require(replications >= 1000, "need at least 1000 replications");
    require(threads >= 1, "need threads >= 1");

    CoverTimeResult out;
    out.n = n;
    out.replications = replications;
    const double dk = static_cast<double>(params.d) * params.k;
    out.threshold_statement = dk / (6.0 * params.iota) * std::log(dk / 3.0);
    out.threshold_proof = dk / (6.0 * params.iota) * (std::log(dk / 3.0) + 1.0);

    if (n == 0) {
        // No visits happen strictly inside an empty window.
        out.survival = 1.0;
        out.ci_low = out.ci_high = 1.0;
        return out;
    }

    const CmcModel model = build_block_instance(params);
    const LoggingPolicy policy = block_uniform_policy(params.d, params.k);
    const Distribution d0 = block_pair_stationary(params);

    const int nthreads = std::min<int>(threads, replications);
    std::vector<int64_t> exceed(nthreads, 0);
    auto worker = [&](int t) {
        int64_t count = 0;
        for (int r = t; r < replications; r += nthreads) {
            const uint64_t child = derive_child_seed(seed, static_cast<uint64_t>(r));
            Trajectory traj = simulate(model, policy, d0, static_cast<int>(n), child);
            if (touring_time(traj, params.d, params.k).value > n) ++count;
        }
        exceed[t] = count;
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    int64_t total = 0;
    for (int64_t c : exceed) total += c;
    const double p_hat = static_cast<double>(total) / replications;
    const double half = 2.576 * std::sqrt(p_hat * (1.0 - p_hat) / replications);
    out.survival = p_hat;
    out.ci_low = std::max(0.0, p_hat - half);
    out.ci_high = std::min(1.0, p_hat + half);
    return out;
}

}  // namespace cmc
