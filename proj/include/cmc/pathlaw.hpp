#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cmc/model.hpp"
#include "cmc/policies.hpp"

namespace cmc {

// Exact finite-horizon law of the pair process (X_0,a_0),...,(X_m,a_m) under
// (model, policy, d0). Mirrors simulate() step for step, so enumeration and
// sampling share one definition of the process.
//
// Paths are sequences of pair indices p_t = x_t*k + a_t. Prefix keys encode
// p_0..p_{t-1} as base-(d*k) digits, most significant first.
class PathLaw {
public:
    PathLaw(const CmcModel& model, const LoggingPolicy& policy, const Distribution& d0, int m);

    int d() const { return model_->d; }
    int k() const { return model_->k; }
    int pairs() const { return model_->d * model_->k; }
    int horizon() const { return m_; }

    // Number of length-(m+1) pair paths, or throws TooLarge beyond max_paths.
    static std::uint64_t path_count(int d, int k, int m, std::uint64_t max_paths);

    // P(p_i = pair | p_0..p_{i-1} = prefix). prefix has length i.
    double step_prob(int i, const std::vector<int>& prefix, int pair) const;

    // Probability of a full prefix p_0..p_{len-1}.
    double prefix_prob(const std::vector<int>& prefix) const;

    // Depth-first enumeration of all positive-probability paths of length
    // upto+1. cb(path, prob) sees pair indices and the exact path probability.
    void for_each_path(int upto,
                       const std::function<void(const std::vector<int>&, double)>& cb) const;

private:
    const CmcModel* model_;
    const LoggingPolicy* policy_;
    Distribution d0_;
    Distribution marg0_;  // state marginal of d0 (joint-start indices aside)
    int m_;

    void dfs(int depth, int upto, double prob, std::vector<int>& path,
             std::vector<int32_t>& xs, std::vector<int32_t>& as,
             const std::function<void(const std::vector<int>&, double)>& cb) const;
};

}  // namespace cmc
