#include "cmc/estimate.hpp"

#include <algorithm>

#include "cmc/errors.hpp"

namespace cmc {

std::int64_t CountTable::observed(int s, int l) const {
    std::int64_t n = 0;
    for (int t = 0; t < d; ++t) n += transition(s, t, l);
    return n;
}

bool EstimatedModel::is_defined(int s, int l) const {
    auto key = std::make_pair(s, l);
    return !std::binary_search(undefined_rows.begin(), undefined_rows.end(), key);
}

// ---------- counting ----------

CountTable count(const Trajectory& traj, int d, int k) { return count(traj, d, k, 0); }

CountTable count(const Trajectory& traj, int d, int k, int episode_len) {
    std::size_t m = traj.m();
    if (m < 1) throw InvalidParameter("count: trajectory must have length >= 2");
    if (episode_len < 0) throw InvalidParameter("count: episode length must be >= 0");
    CountTable c;
    c.d = d;
    c.k = k;
    c.visits.assign(static_cast<std::size_t>(d) * k, 0);
    c.trans.assign(static_cast<std::size_t>(k) * d * d, 0);
    // Visits over i = 1..m; transitions over i = 1..m-1 (no X_{m+1}).
    // With restarts, X_{i+1} at i+1 = 0 mod episode_len does not come from
    // the kernel, so that transition is dropped as well.
    for (std::size_t i = 1; i <= m; ++i) {
        int s = traj.states[i];
        int l = traj.controls[i];
        ++c.visits[static_cast<std::size_t>(s) * k + l];
        if (i < m && (episode_len == 0 || (i + 1) % episode_len != 0)) {
            int t = traj.states[i + 1];
            ++c.trans[(static_cast<std::size_t>(l) * d + s) * d + t];
        }
    }
    return c;
}

CountTable merge(const CountTable& a, const CountTable& b) {
    if (a.d != b.d || a.k != b.k)
        throw DimensionMismatch("merge: count tables have different shapes");
    CountTable c = a;
    for (std::size_t i = 0; i < c.visits.size(); ++i) c.visits[i] += b.visits[i];
    for (std::size_t i = 0; i < c.trans.size(); ++i) c.trans[i] += b.trans[i];
    return c;
}

// ---------- estimator ----------

EstimatedModel estimate(const CountTable& counts) {
    int d = counts.d, k = counts.k;
    EstimatedModel est;
    est.model.d = d;
    est.model.k = k;
    est.model.matrices.assign(k, Matrix(d, d));
    for (int l = 0; l < k; ++l) {
        for (int s = 0; s < d; ++s) {
            std::int64_t n = counts.observed(s, l);
            if (n == 0) {
                for (int t = 0; t < d; ++t) est.model.matrices[l](s, t) = 1.0 / d;
                est.undefined_rows.emplace_back(s, l);
            } else {
                for (int t = 0; t < d; ++t)
                    est.model.matrices[l](s, t) =
                        static_cast<double>(counts.transition(s, t, l)) / static_cast<double>(n);
            }
        }
    }
    std::sort(est.undefined_rows.begin(), est.undefined_rows.end());
    return est;
}

ErrorReport estimation_error(const EstimatedModel& est, const CmcModel& truth) {
    if (est.model.d != truth.d || est.model.k != truth.k)
        throw DimensionMismatch("estimation_error: dimension mismatch");
    int d = truth.d, k = truth.k;
    ErrorReport rep;
    rep.row_l1 = Matrix(d, k);
    for (int l = 0; l < k; ++l) {
        for (int s = 0; s < d; ++s) {
            double r = 0.0;
            for (int t = 0; t < d; ++t)
                r += std::abs(est.model.matrices[l](s, t) - truth.matrices[l](s, t));
            rep.row_l1(s, l) = r;
            rep.sup_error = std::max(rep.sup_error, r);
        }
    }
    return rep;
}

} // namespace cmc
