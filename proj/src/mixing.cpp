#include "cmc/mixing.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <algorithm>
#include <unordered_map>

#include "cmc/errors.hpp"

namespace cmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix nan_matrix(int n) {
    Matrix out(n, n);
    for (double& v : out.a) v = kNaN;
    return out;
}

// Base-P keys of path segments; prefix_keys[t] encodes pairs 0..t-1.
void prefix_keys(const std::vector<int>& path, int P, std::vector<std::uint64_t>& keys) {
    keys.resize(path.size() + 1);
    keys[0] = 0;
    for (std::size_t t = 0; t < path.size(); ++t)
        keys[t + 1] = keys[t] * static_cast<std::uint64_t>(P) + path[t];
}

std::uint64_t segment_key(const std::vector<std::uint64_t>& keys, int from, int to_excl,
                          const std::vector<std::uint64_t>& powP) {
    return keys[to_excl] - keys[from] * powP[to_excl - from];
}

using SparseLaw = std::unordered_map<std::uint64_t, double>;

// TV between u/mu and v/mv; masses must be positive.
double tv_normalized(const SparseLaw& u, double mu, const SparseLaw& v, double mv) {
    double s = 0.0;
    for (const auto& [key, val] : u) {
        auto it = v.find(key);
        s += std::abs(val / mu - (it == v.end() ? 0.0 : it->second / mv));
    }
    for (const auto& [key, val] : v)
        if (u.find(key) == u.end()) s += val / mv;
    return 0.5 * s;
}

double tv_dense(const std::vector<double>& u, double mu, const std::vector<double>& v, double mv) {
    double s = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) s += std::abs(u[t] / mu - v[t] / mv);
    return 0.5 * s;
}

std::vector<std::uint64_t> power_table(int P, int upto) {
    std::vector<std::uint64_t> powP(upto + 1);
    powP[0] = 1;
    for (int t = 1; t <= upto; ++t) powP[t] = powP[t - 1] * P;
    return powP;
}

}  // namespace

Matrix compute_eta_bar(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0,
                       int m, std::uint64_t max_paths) {
    PathLaw::path_count(model.d, model.k, m, max_paths);
    PathLaw law(model, policy, d0, m);
    int P = law.pairs();
    auto powP = power_table(P, m + 1);
    Matrix eta = nan_matrix(m + 1);

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j <= m; ++j) {
            // tails[hist*P + y] = unnormalized law of pairs j..m given
            // (pairs 0..i-1 = hist, y_i = y)
            std::unordered_map<std::uint64_t, SparseLaw> tails;
            SparseLaw mass;
            std::vector<std::uint64_t> keys;
            law.for_each_path(m, [&](const std::vector<int>& path, double pr) {
                prefix_keys(path, P, keys);
                std::uint64_t ck = keys[i] * P + path[i];
                tails[ck][segment_key(keys, j, m + 1, powP)] += pr;
                mass[ck] += pr;
            });
            // Diameter of the set of conditional tail laws: sup over ANY two
            // positive-probability conditionings (hist, y). The one-history
            // restriction would break phi <= eta_bar on periodic chains.
            std::vector<std::uint64_t> events;
            events.reserve(mass.size());
            for (const auto& [ck, mu] : mass) events.push_back(ck);
            std::sort(events.begin(), events.end());
            double sup = 0.0;
            for (std::size_t a = 0; a < events.size() && sup < 1.0 - 1e-14; ++a)
                for (std::size_t b = a + 1; b < events.size() && sup < 1.0 - 1e-14; ++b)
                    sup = std::max(sup, tv_normalized(tails[events[a]], mass[events[a]],
                                                      tails[events[b]], mass[events[b]]));
            eta(i, j) = sup;
        }
    }
    return eta;
}

Matrix compute_phi(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0,
                   int m, std::uint64_t max_paths) {
    PathLaw::path_count(model.d, model.k, m, max_paths);
    PathLaw law(model, policy, d0, m);
    int P = law.pairs();
    auto powP = power_table(P, m + 1);
    Matrix phi = nan_matrix(m + 1);

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j <= m; ++j) {
            std::unordered_map<std::uint64_t, SparseLaw> tails;  // key: pairs 0..i
            SparseLaw mass;
            SparseLaw uncond;
            double total = 0.0;
            std::vector<std::uint64_t> keys;
            law.for_each_path(m, [&](const std::vector<int>& path, double pr) {
                prefix_keys(path, P, keys);
                std::uint64_t h = keys[i + 1];
                std::uint64_t tk = segment_key(keys, j, m + 1, powP);
                tails[h][tk] += pr;
                mass[h] += pr;
                uncond[tk] += pr;
                total += pr;
            });
            double sup = 0.0;
            for (const auto& [h, mu] : mass)
                sup = std::max(sup, tv_normalized(tails[h], mu, uncond, total));
            phi(i, j) = sup;
        }
    }
    return phi;
}

Matrix compute_theta_bar(const CmcModel& model, const LoggingPolicy& policy,
                         const Distribution& d0, int m, std::uint64_t max_paths) {
    PathLaw::path_count(model.d, model.k, m, max_paths);
    PathLaw law(model, policy, d0, m);
    int P = law.pairs();
    int d = law.d(), k = law.k();
    Matrix theta = nan_matrix(m + 1);

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j <= m; ++j) {
            std::vector<double> joint(static_cast<std::size_t>(P) * d, 0.0);
            std::vector<double> mass(P, 0.0);
            law.for_each_path(j, [&](const std::vector<int>& path, double pr) {
                int y = path[i];
                joint[static_cast<std::size_t>(y) * d + pair_state(path[j], k)] += pr;
                mass[y] += pr;
            });
            double sup = 0.0;
            for (int y1 = 0; y1 < P; ++y1) {
                if (mass[y1] == 0.0) continue;
                for (int y2 = y1 + 1; y2 < P; ++y2) {
                    if (mass[y2] == 0.0) continue;
                    double s = 0.0;
                    for (int t = 0; t < d; ++t)
                        s += std::abs(joint[static_cast<std::size_t>(y1) * d + t] / mass[y1] -
                                      joint[static_cast<std::size_t>(y2) * d + t] / mass[y2]);
                    sup = std::max(sup, 0.5 * s);
                }
            }
            theta(i, j) = sup;
        }
    }
    return theta;
}

std::vector<Matrix> compute_gamma(const CmcModel& model, const LoggingPolicy& policy,
                                  const Distribution& d0, int m, std::uint64_t max_paths) {
    PathLaw::path_count(model.d, model.k, m, max_paths);
    PathLaw law(model, policy, d0, m);
    int P = law.pairs();
    int d = law.d(), k = law.k();
    auto powP = power_table(P, m + 1);
    std::vector<Matrix> gamma(m + 1, nan_matrix(m + 1));

    using ControlLaw = std::unordered_map<std::uint64_t, std::vector<double>>;
    for (int i = 0; i <= m; ++i) {
        for (int j = 1; i + j <= m; ++j) {
            // cond[p]: (remote pairs 0..i, near pairs i+j..p-1, X_p) -> law of a_p
            // marg[p]: (near pairs i+j..p-1, X_p) -> law of a_p
            std::vector<ControlLaw> cond(m + 1), marg(m + 1);
            std::vector<std::uint64_t> keys;
            law.for_each_path(m, [&](const std::vector<int>& path, double pr) {
                prefix_keys(path, P, keys);
                std::uint64_t remote = keys[i + 1];
                for (int p = i + j; p <= m; ++p) {
                    std::uint64_t near = segment_key(keys, i + j, p, powP);
                    int sp = pair_state(path[p], k);
                    int ap = pair_control(path[p], k);
                    std::uint64_t ckey = (remote * powP[p - i - j] + near) * d + sp;
                    std::uint64_t mkey = near * static_cast<std::uint64_t>(d) + sp;
                    auto& cv = cond[p][ckey];
                    if (cv.empty()) cv.assign(k, 0.0);
                    cv[ap] += pr;
                    auto& mv = marg[p][mkey];
                    if (mv.empty()) mv.assign(k, 0.0);
                    mv[ap] += pr;
                }
            });
            for (int p = i + j; p <= m; ++p) {
                double sup = 0.0;
                for (const auto& [ckey, cv] : cond[p]) {
                    std::uint64_t sp = ckey % d;
                    std::uint64_t near = (ckey / d) % powP[p - i - j];
                    const auto& mv = marg[p].at(near * d + sp);
                    double cm = 0.0, mm = 0.0;
                    for (int l = 0; l < k; ++l) {
                        cm += cv[l];
                        mm += mv[l];
                    }
                    sup = std::max(sup, tv_dense(cv, cm, mv, mm));
                }
                gamma[p](i, j) = sup;
            }
        }
    }
    return gamma;
}

double delta_norm(const Matrix& eta_bar, int m) {
    if (m < 1 || eta_bar.rows < m + 1 || eta_bar.cols < m + 1)
        throw InvalidParameter("delta_norm: eta table must cover indices 0..m with m >= 1");
    double best = 0.0;
    for (int i = 1; i <= m; ++i) {
        double row = 1.0;
        for (int j = i + 1; j <= m; ++j) row += eta_bar(i, j);
        best = std::max(best, row);
    }
    return best;
}

bool check_covariance_inequality(const PathLaw& law, const std::vector<double>& f,
                                 const std::vector<double>& g, int i, int j, const Matrix& phi) {
    int P = law.pairs();
    if (static_cast<int>(f.size()) != P || static_cast<int>(g.size()) != P)
        throw DimensionMismatch("covariance check: f and g must be tables over d*k pairs");
    if (!(0 <= i && i < j && j <= law.horizon()))
        throw InvalidParameter("covariance check: need 0 <= i < j <= m");
    if (phi.rows <= j || phi.cols <= j)
        throw DimensionMismatch("covariance check: phi table does not cover (i, j)");

    std::vector<double> law_i(P, 0.0), law_j(P, 0.0);
    std::vector<double> joint(static_cast<std::size_t>(P) * P, 0.0);
    law.for_each_path(j, [&](const std::vector<int>& path, double pr) {
        law_i[path[i]] += pr;
        law_j[path[j]] += pr;
        joint[static_cast<std::size_t>(path[i]) * P + path[j]] += pr;
    });

    double ef = 0.0, eg = 0.0, efg = 0.0, abs_dev = 0.0, ess_sup = 0.0;
    for (int y = 0; y < P; ++y) {
        ef += law_j[y] * f[y];
        eg += law_i[y] * g[y];
        if (law_i[y] > 0.0) ess_sup = std::max(ess_sup, std::abs(g[y]));
    }
    for (int y1 = 0; y1 < P; ++y1)
        for (int y2 = 0; y2 < P; ++y2)
            efg += joint[static_cast<std::size_t>(y1) * P + y2] * g[y1] * f[y2];
    for (int y = 0; y < P; ++y) abs_dev += law_j[y] * std::abs(f[y] - ef);

    double cov = efg - ef * eg;
    return std::abs(cov) <= phi(i, j) * abs_dev * ess_sup + 1e-10;
}

MixingReport compute_mixing_report(const CmcModel& model, const LoggingPolicy& policy,
                                   const Distribution& d0, int m, std::uint64_t max_paths) {
    MixingReport rep;
    rep.d = model.d;
    rep.k = model.k;
    rep.m = m;
    rep.d0 = d0;
    rep.eta_bar = compute_eta_bar(model, policy, d0, m, max_paths);
    rep.phi = compute_phi(model, policy, d0, m, max_paths);
    rep.theta_bar = compute_theta_bar(model, policy, d0, m, max_paths);
    rep.gamma = compute_gamma(model, policy, d0, m, max_paths);
    rep.delta_norm = delta_norm(rep.eta_bar, m);
    return rep;
}

}  // namespace cmc
