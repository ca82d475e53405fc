#include "cmc/pathlaw.hpp"

#include "cmc/errors.hpp"
#include "cmc/simulate.hpp"

namespace cmc {

PathLaw::PathLaw(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0, int m)
    : model_(&model), policy_(&policy), d0_(d0), m_(m) {
    validate_model(model);
    validate_policy(policy, model.d, model.k);
    if (m < 1) throw InvalidParameter("path law: m must be >= 1");
    if (d0.size() != model.d * model.k)
        throw DimensionMismatch("path law: d0 must be a distribution over d*k pairs");
    marg0_ = state_marginal(d0, model.d, model.k);
}

std::uint64_t PathLaw::path_count(int d, int k, int m, std::uint64_t max_paths) {
    std::uint64_t n = 1;
    std::uint64_t dk = static_cast<std::uint64_t>(d) * k;
    for (int t = 0; t <= m; ++t) {
        if (n > max_paths / dk + 1) n = max_paths + 1;
        else n *= dk;
        if (n > max_paths)
            throw TooLarge("path enumeration needs (d*k)^(m+1) > " + std::to_string(max_paths) +
                           " paths");
    }
    return n;
}

double PathLaw::step_prob(int i, const std::vector<int>& prefix, int pair) const {
    int kk = model_->k;
    int x = pair_state(pair, kk);
    int a = pair_control(pair, kk);
    if (restarts_at(*policy_, i)) return (i == 0 ? d0_ : restart_law(*policy_)).w[pair];
    if (i == 0) {
        Distribution law = control_law(*policy_, kk, 0, x, HistoryView{});
        return marg0_.w[x] * law.w[a];
    }
    int prev = prefix[i - 1];
    double move = model_->matrices[pair_control(prev, kk)](pair_state(prev, kk), x);
    if (move == 0.0) return 0.0;
    std::vector<int32_t> xs(i), as(i);
    for (int t = 0; t < i; ++t) {
        xs[t] = pair_state(prefix[t], kk);
        as[t] = pair_control(prefix[t], kk);
    }
    Distribution law = control_law(*policy_, kk, i, x, HistoryView{xs.data(), as.data(), i});
    return move * law.w[a];
}

double PathLaw::prefix_prob(const std::vector<int>& prefix) const {
    double p = 1.0;
    std::vector<int> head;
    head.reserve(prefix.size());
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        p *= step_prob(static_cast<int>(i), head, prefix[i]);
        if (p == 0.0) return 0.0;
        head.push_back(prefix[i]);
    }
    return p;
}

void PathLaw::for_each_path(
    int upto, const std::function<void(const std::vector<int>&, double)>& cb) const {
    if (upto > m_) throw InvalidParameter("path law: enumeration beyond horizon");
    std::vector<int> path;
    path.reserve(upto + 1);
    std::vector<int32_t> xs, as;
    xs.reserve(upto + 1);
    as.reserve(upto + 1);
    dfs(0, upto, 1.0, path, xs, as, cb);
}

void PathLaw::dfs(int depth, int upto, double prob, std::vector<int>& path,
                  std::vector<int32_t>& xs, std::vector<int32_t>& as,
                  const std::function<void(const std::vector<int>&, double)>& cb) const {
    if (depth > upto) {
        cb(path, prob);
        return;
    }
    int kk = model_->k;
    bool restart = restarts_at(*policy_, depth);
    for (int pair = 0; pair < pairs(); ++pair) {
        int x = pair_state(pair, kk);
        int a = pair_control(pair, kk);
        double step;
        if (restart) {
            step = (depth == 0 ? d0_ : restart_law(*policy_)).w[pair];
        } else if (depth == 0) {
            if (marg0_.w[x] == 0.0) continue;
            Distribution law = control_law(*policy_, kk, 0, x, HistoryView{});
            step = marg0_.w[x] * law.w[a];
        } else {
            double move = model_->matrices[as[depth - 1]](xs[depth - 1], x);
            if (move == 0.0) continue;
            Distribution law =
                control_law(*policy_, kk, depth, x, HistoryView{xs.data(), as.data(), depth});
            step = move * law.w[a];
        }
        if (step == 0.0) continue;
        path.push_back(pair);
        xs.push_back(x);
        as.push_back(a);
        dfs(depth + 1, upto, prob * step, path, xs, as, cb);
        path.pop_back();
        xs.pop_back();
        as.pop_back();
    }
}

}  // namespace cmc
