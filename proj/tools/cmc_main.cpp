#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cmc/bounds.hpp"
#include "cmc/errors.hpp"
#include "cmc/estimate.hpp"
#include "cmc/hardness.hpp"
#include "cmc/io.hpp"
#include "cmc/mixing.hpp"
#include "cmc/model.hpp"
#include "cmc/ope.hpp"
#include "cmc/policies.hpp"
#include "cmc/presets.hpp"
#include "cmc/rng.hpp"
#include "cmc/simulate.hpp"

namespace {

using cmc::ConfigError;
using cmc::IoError;
using nlohmann::json;

constexpr const char* kToolVersion = "cmc 1.0.0";

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

cmc::MetadataRows base_metadata(uint64_t seed) {
    return {{"tool", kToolVersion}, {"rng", cmc::kRngAlgorithm}, {"seed", std::to_string(seed)}};
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

// Runs fn(r) for r in [0, count) across `threads` workers; replication r's
// randomness must come from derive_child_seed so the split is immaterial.
void parallel_replications(int count, int threads, const std::function<void(int)>& fn) {
    const int n = std::max(1, std::min(threads, count));
    if (n == 1) {
        for (int r = 0; r < count; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&, t]() {
            for (int r = t; r < count; r += n) fn(r);
        });
    for (auto& th : pool) th.join();
}

// ---------- input bundles ----------

struct SourceOpts {
    std::string preset;
    std::string model_path;
    std::string policy_path;
    std::string d0_spec;  // "", "uniform", or a JSON file of d*k weights
};

struct Loaded {
    cmc::CmcModel model;
    cmc::LoggingPolicy policy;
    cmc::Distribution d0;
    bool has_constants = false;
    cmc::ClassConstants constants;
    std::string name;
};

Loaded load_source(const SourceOpts& src, bool need_policy) {
    Loaded out;
    if (!src.preset.empty()) {
        if (!src.model_path.empty() || !src.policy_path.empty())
            throw ConfigError("pass either --preset or --model/--policy, not both");
        cmc::Preset p = cmc::get_preset(src.preset);
        out.model = std::move(p.model);
        out.policy = std::move(p.policy);
        out.d0 = std::move(p.d0);
        out.constants = p.constants;
        out.has_constants = p.has_constants;
        out.name = p.name;
    } else {
        if (src.model_path.empty()) throw ConfigError("need --preset or --model");
        out.model = cmc::model_from_json(cmc::read_json_file(src.model_path));
        out.name = src.model_path;
        if (!src.policy_path.empty()) {
            out.policy = cmc::policy_from_json(cmc::read_json_file(src.policy_path));
        } else if (need_policy) {
            throw ConfigError("need --policy with --model");
        }
        out.d0 = cmc::joint_initial(out.policy, out.model.k,
                                    cmc::uniform_distribution(out.model.d));
    }
    if (need_policy) cmc::validate_policy(out.policy, out.model.d, out.model.k);
    if (src.d0_spec == "uniform") {
        out.d0 = cmc::joint_initial(out.policy, out.model.k,
                                    cmc::uniform_distribution(out.model.d));
    } else if (!src.d0_spec.empty()) {
        cmc::Distribution d0;
        d0.w = cmc::read_json_file(src.d0_spec).get<std::vector<double>>();
        if (static_cast<int>(d0.w.size()) != out.model.d * out.model.k)
            throw ConfigError("--d0 file must hold d*k weights");
        out.d0 = cmc::validate_distribution(std::move(d0));
    }
    return out;
}

void add_source_flags(CLI::App* sub, SourceOpts& src) {
    sub->add_option("--preset", src.preset, "named preset (see README)");
    sub->add_option("--model", src.model_path, "model JSON file");
    sub->add_option("--policy", src.policy_path, "logging-policy JSON file");
    sub->add_option("--d0", src.d0_spec, "initial pair law: 'uniform' or a JSON weight file");
}

// ---------- simulate ----------

struct SimulateOpts {
    SourceOpts src;
    int m = 1000;
    uint64_t seed = 0;
    std::string scheme = "direct";
    std::string out;
    std::string format = "bin";
};

void run_simulate(const SimulateOpts& opt) {
    Loaded in = load_source(opt.src, /*need_policy=*/true);
    cmc::Trajectory traj =
        opt.scheme == "array"
            ? cmc::simulate_via_array_scheme(in.model, in.policy, in.d0, opt.m, opt.seed)
            : cmc::simulate(in.model, in.policy, in.d0, opt.m, opt.seed);
    cmc::TrajectoryHeader header;
    header.d = in.model.d;
    header.k = in.model.k;
    header.policy_hash = cmc::hash_policy(in.policy);
    if (opt.format == "bin") {
        cmc::write_trajectory_binary(opt.out, traj, header);
    } else if (opt.format == "csv") {
        auto meta = base_metadata(opt.seed);
        meta.emplace_back("d", std::to_string(header.d));
        meta.emplace_back("k", std::to_string(header.k));
        meta.emplace_back("m", std::to_string(opt.m));
        meta.emplace_back("policy_hash", hex64(header.policy_hash));
        auto os = open_out(opt.out);
        cmc::write_trajectory_csv(os, traj, meta);
    } else {
        json j{{"d", header.d},
               {"k", header.k},
               {"m", opt.m},
               {"seed", traj.seed},
               {"policy_hash", hex64(header.policy_hash)},
               {"states", traj.states},
               {"controls", traj.controls}};
        if (!traj.omega.empty()) j["omega"] = traj.omega;
        cmc::write_json_file(opt.out, j);
    }
}

// ---------- estimate ----------

struct EstimateOpts {
    std::vector<std::string> traj_paths;
    std::string truth_path;
    std::string out;
    std::string format = "json";
    int episode_len = 0;
};

void run_estimate(const EstimateOpts& opt) {
    if (opt.traj_paths.empty()) throw ConfigError("need at least one --traj file");
    cmc::CountTable counts;
    bool first = true;
    uint64_t first_seed = 0;
    for (const std::string& path : opt.traj_paths) {
        cmc::TrajectoryHeader header;
        cmc::Trajectory traj = cmc::read_trajectory_binary(path, &header);
        cmc::CountTable c = cmc::count(traj, header.d, header.k, opt.episode_len);
        if (first) {
            counts = std::move(c);
            first_seed = traj.seed;
            first = false;
        } else {
            counts = cmc::merge(counts, c);
        }
    }
    cmc::EstimatedModel est = cmc::estimate(counts);
    double sup_error = std::nan("");
    if (!opt.truth_path.empty()) {
        const cmc::CmcModel truth = cmc::model_from_json(cmc::read_json_file(opt.truth_path));
        sup_error = cmc::estimation_error(est, truth).sup_error;
    }
    if (opt.format == "json") {
        json j = cmc::estimated_to_json(est);
        if (!std::isnan(sup_error)) j["sup_error"] = sup_error;
        cmc::write_json_file(opt.out, j);
    } else {
        auto meta = base_metadata(first_seed);
        meta.emplace_back("d", std::to_string(est.model.d));
        meta.emplace_back("k", std::to_string(est.model.k));
        std::string rows;
        for (const auto& [s, l] : est.undefined_rows)
            rows += (rows.empty() ? "" : ";") + std::to_string(s) + ":" + std::to_string(l);
        meta.emplace_back("undefined_rows", rows);
        if (!std::isnan(sup_error)) meta.emplace_back("sup_error", cmc::format_double(sup_error));
        auto os = open_out(opt.out);
        cmc::write_metadata(os, meta);
        os << "control,row,col,value\n";
        for (int l = 0; l < est.model.k; ++l)
            for (int s = 0; s < est.model.d; ++s)
                for (int t = 0; t < est.model.d; ++t)
                    os << l << ',' << s << ',' << t << ','
                       << cmc::format_double(est.model.matrices[l](s, t)) << '\n';
    }
}

// ---------- mixing ----------

struct MixingOpts {
    SourceOpts src;
    int m = 3;
    int64_t max_paths = cmc::kDefaultEnumerationCap;
    std::string out;
    std::string format = "json";
};

void run_mixing(const MixingOpts& opt) {
    Loaded in = load_source(opt.src, /*need_policy=*/true);
    const cmc::MixingReport report =
        cmc::compute_mixing_report(in.model, in.policy, in.d0, opt.m, opt.max_paths);
    if (opt.format == "json") {
        cmc::write_json_file(opt.out, cmc::mixing_report_to_json(report));
        return;
    }
    auto meta = base_metadata(0);
    meta.emplace_back("d", std::to_string(report.d));
    meta.emplace_back("k", std::to_string(report.k));
    meta.emplace_back("m", std::to_string(report.m));
    meta.emplace_back("delta_norm", cmc::format_double(report.delta_norm));
    auto os = open_out(opt.out);
    cmc::write_metadata(os, meta);
    os << "i,j,eta_bar,phi,theta_bar\n";
    for (int i = 0; i <= report.m; ++i)
        for (int j = i + 1; j <= report.m; ++j)
            os << i << ',' << j << ',' << cmc::format_double(report.eta_bar(i, j)) << ','
               << cmc::format_double(report.phi(i, j)) << ','
               << cmc::format_double(report.theta_bar(i, j)) << '\n';
}

// ---------- bounds ----------

struct BoundsOpts {
    std::vector<std::string> presets;
    double eps = 0.1;
    double delta = 0.1;
    double c = 1.0;
    double C_pel = 1.0;
    double rho_star = 1.0;
    std::string out;
    std::string format = "csv";
};

void run_bounds(const BoundsOpts& opt) {
    std::vector<std::string> names = opt.presets;
    if (names.empty())
        for (const std::string& n : cmc::preset_names())
            if (cmc::get_preset(n).has_constants) names.push_back(n);
    json rows = json::array();
    for (const std::string& name : names) {
        const cmc::Preset p = cmc::get_preset(name);
        if (!p.has_constants) throw ConfigError("preset has no class constants: " + name);
        const cmc::BoundInputs in = cmc::to_bound_inputs(p.constants, p.model.d, p.model.k,
                                                         opt.eps, opt.delta, opt.rho_star, opt.c,
                                                         opt.C_pel);
        rows.push_back(json{{"class", name},
                            {"T", p.constants.T},
                            {"zeta1", p.constants.zeta1},
                            {"zeta2", p.constants.zeta2},
                            {"C_delta", p.constants.C_delta()},
                            {"m_star_hoeffding", cmc::sample_size_hoeffding(in)},
                            {"m_star_bernstein", cmc::sample_size_bernstein(in).m_star}});
    }
    if (opt.format == "json") {
        cmc::write_json_file(opt.out, rows);
        return;
    }
    auto meta = base_metadata(0);
    meta.emplace_back("eps", cmc::format_double(opt.eps));
    meta.emplace_back("delta", cmc::format_double(opt.delta));
    meta.emplace_back("c", cmc::format_double(opt.c));
    auto os = open_out(opt.out);
    cmc::write_metadata(os, meta);
    os << "class,T,zeta1,zeta2,C_delta,m_star_hoeffding,m_star_bernstein\n";
    for (const auto& row : rows)
        os << row.at("class").get<std::string>() << ','
           << cmc::format_double(row.at("T").get<double>()) << ','
           << cmc::format_double(row.at("zeta1").get<double>()) << ','
           << cmc::format_double(row.at("zeta2").get<double>()) << ','
           << cmc::format_double(row.at("C_delta").get<double>()) << ','
           << cmc::format_double(row.at("m_star_hoeffding").get<double>()) << ','
           << cmc::format_double(row.at("m_star_bernstein").get<double>()) << '\n';
}

// ---------- hardness ----------

struct HardnessOpts {
    std::string family = "block";
    int d = 3;
    int k = 2;
    double p_star = 0.2;
    double eps = 0.01;
    double iota = 0.3;
    std::string sigma_str;
    std::vector<std::string> xi_strs;
    std::string emit_path;
    int gv_length = 0;
    int gv_min_dist = 0;
    std::vector<int64_t> cover_n;
    int replications = 10000;
    uint64_t seed = 0;
    int threads = 1;
    std::string out;
    std::string format = "csv";
};

cmc::PerturbedFamilyParams hardness_params(const HardnessOpts& opt) {
    cmc::PerturbedFamilyParams params;
    params.d = opt.d;
    params.k = opt.k;
    params.p_star = opt.p_star;
    params.eps = opt.eps;
    params.iota = opt.iota;
    if (opt.family == "sigma") {
        std::string s = opt.sigma_str.empty() ? std::string(opt.d / 2, '+') : opt.sigma_str;
        for (char ch : s) {
            if (ch == '+' || ch == '1')
                params.sigma.push_back(1);
            else if (ch == '-')
                params.sigma.push_back(-1);
            else
                throw ConfigError("--sigma characters must be + or -");
        }
    } else if (opt.family == "block") {
        if (opt.xi_strs.empty()) {
            params.xi = cmc::block_preset_params(opt.d, opt.k).xi;
        } else {
            for (const std::string& s : opt.xi_strs) {
                std::vector<int> row;
                for (char ch : s) {
                    if (ch == '+' || ch == '1')
                        row.push_back(1);
                    else if (ch == '0')
                        row.push_back(0);
                    else if (ch == '-')
                        row.push_back(-1);
                    else
                        throw ConfigError("--xi characters must be +, -, 0, or 1");
                }
                params.xi.push_back(std::move(row));
            }
        }
    } else {
        throw ConfigError("--family must be sigma or block");
    }
    return params;
}

void run_hardness(const HardnessOpts& opt) {
    const cmc::PerturbedFamilyParams params = hardness_params(opt);
    if (!opt.emit_path.empty()) {
        const cmc::CmcModel model = opt.family == "sigma" ? cmc::build_sigma_instance(params)
                                                          : cmc::build_block_instance(params);
        cmc::write_json_file(opt.emit_path, cmc::model_to_json(model));
    }
    if (opt.gv_length > 0) {
        const int dist = opt.gv_min_dist > 0 ? opt.gv_min_dist
                                             : std::max(1, opt.gv_length / 8);
        const cmc::GvSet set = cmc::gilbert_varshamov_set(opt.gv_length, dist);
        json j{{"n", opt.gv_length},
               {"min_dist", dist},
               {"target", set.target},
               {"target_met", set.target_met},
               {"codewords", set.codewords}};
        cmc::write_json_file(opt.out.empty() ? "gv.json" : opt.out, j);
        return;
    }
    if (opt.cover_n.empty()) {
        if (opt.emit_path.empty())
            throw ConfigError("nothing to do: pass --emit, --gv-length, or --cover-n");
        return;
    }
    if (opt.family != "block") throw ConfigError("cover-time experiment needs --family block");
    std::vector<cmc::CoverTimeResult> results(opt.cover_n.size());
    for (size_t i = 0; i < opt.cover_n.size(); ++i)
        results[i] = cmc::cover_time_experiment(params, opt.cover_n[i], opt.replications,
                                                cmc::derive_child_seed(opt.seed, i), opt.threads);
    if (opt.format == "json") {
        json rows = json::array();
        for (const auto& r : results)
            rows.push_back(json{{"n", r.n},
                                {"survival", r.survival},
                                {"ci_low", r.ci_low},
                                {"ci_high", r.ci_high},
                                {"threshold_statement", r.threshold_statement},
                                {"threshold_proof", r.threshold_proof}});
        cmc::write_json_file(opt.out, rows);
        return;
    }
    auto meta = base_metadata(opt.seed);
    meta.emplace_back("family", "block");
    meta.emplace_back("d", std::to_string(params.d));
    meta.emplace_back("k", std::to_string(params.k));
    meta.emplace_back("iota", cmc::format_double(params.iota));
    meta.emplace_back("replications", std::to_string(opt.replications));
    meta.emplace_back("threshold_statement", cmc::format_double(results[0].threshold_statement));
    meta.emplace_back("threshold_proof", cmc::format_double(results[0].threshold_proof));
    auto os = open_out(opt.out);
    cmc::write_metadata(os, meta);
    os << "n,survival,ci_low,ci_high\n";
    for (const auto& r : results)
        os << r.n << ',' << cmc::format_double(r.survival) << ','
           << cmc::format_double(r.ci_low) << ',' << cmc::format_double(r.ci_high) << '\n';
}

// ---------- ope ----------

struct OpeOpts {
    std::string model_path;
    std::string est_path;
    std::string policy_matrix_path;
    std::string cost_path;
    double alpha = 0.9;
    std::string preset;
    double eps = 0.05;
    double delta = 0.1;
    std::string out;
    std::string format = "json";
};

cmc::Matrix read_policy_matrix(const std::string& path) {
    const json j = cmc::read_json_file(path);
    if (j.is_array()) return cmc::matrix_from_json(j);
    if (j.is_object() && j.contains("P")) return cmc::matrix_from_json(j.at("P"));
    throw IoError("policy matrix file must be a JSON matrix or {\"P\": matrix}");
}

cmc::Matrix read_cost_csv(const std::string& path, int d, int k) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    cmc::Matrix g(d, k);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("state", 0) == 0) continue;
        int s = 0, l = 0;
        double v = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf", &s, &l, &v) != 3)
            throw IoError("cost CSV rows must be state,control,cost");
        if (s < 0 || s >= d || l < 0 || l >= k) throw IoError("cost CSV index out of range");
        g(s, l) = v;
    }
    return g;
}

void run_ope(const OpeOpts& opt) {
    if (opt.model_path.empty()) throw ConfigError("need --model (ground-truth model JSON)");
    if (opt.policy_matrix_path.empty()) throw ConfigError("need --policy-matrix");
    if (opt.cost_path.empty()) throw ConfigError("need --cost");
    const cmc::CmcModel truth = cmc::model_from_json(cmc::read_json_file(opt.model_path));
    const cmc::Matrix Pi = read_policy_matrix(opt.policy_matrix_path);
    const cmc::Matrix g_tilde = read_cost_csv(opt.cost_path, truth.d, truth.k);

    const cmc::OpeProblem problem = cmc::compose_policy(truth, Pi, g_tilde, opt.alpha);
    const std::vector<double> V = cmc::solve_value(problem);

    json j{{"alpha", opt.alpha},
           {"V", V},
           {"bellman_residual", cmc::bellman_residual(problem, V)}};

    if (!opt.est_path.empty()) {
        const cmc::EstimatedModel est =
            cmc::estimated_from_json(cmc::read_json_file(opt.est_path));
        const cmc::OpeProblem plugged = cmc::compose_plug_in(est, Pi, g_tilde, opt.alpha);
        const std::vector<double> V_hat = cmc::solve_value(plugged);
        double err = 0.0;
        for (size_t s = 0; s < V.size(); ++s) err = std::max(err, std::abs(V_hat[s] - V[s]));
        j["V_hat"] = V_hat;
        j["sup_value_error"] = err;
        j["perturbation_bound"] =
            cmc::perturbation_bound(problem.M, plugged.M, problem.g, opt.alpha);
        j["bellman_residual_hat"] = cmc::bellman_residual(plugged, V_hat);
        j["undefined_states"] = plugged.undefined_states;
    }
    if (!opt.preset.empty()) {
        const cmc::Preset p = cmc::get_preset(opt.preset);
        if (!p.has_constants) throw ConfigError("preset has no class constants: " + opt.preset);
        j["T_alpha"] = cmc::t_alpha(problem.g, truth.d, opt.alpha, p.constants.T);
        const cmc::BoundInputs in = cmc::to_bound_inputs(p.constants, truth.d, truth.k, opt.eps,
                                                         opt.delta, 1.0, 1.0, 1.0);
        j["ope_sample_size"] = cmc::ope_sample_size(in, problem.g, opt.alpha);
    }
    if (opt.format == "json") {
        cmc::write_json_file(opt.out, j);
        return;
    }
    auto meta = base_metadata(0);
    meta.emplace_back("alpha", cmc::format_double(opt.alpha));
    for (const char* key : {"sup_value_error", "perturbation_bound", "bellman_residual",
                            "bellman_residual_hat", "T_alpha", "ope_sample_size"})
        if (j.contains(key)) meta.emplace_back(key, cmc::format_double(j.at(key).get<double>()));
    auto os = open_out(opt.out);
    cmc::write_metadata(os, meta);
    const bool with_hat = j.contains("V_hat");
    os << (with_hat ? "state,V,V_hat\n" : "state,V\n");
    for (size_t s = 0; s < V.size(); ++s) {
        os << s << ',' << cmc::format_double(V[s]);
        if (with_hat) os << ',' << cmc::format_double(j.at("V_hat")[s].get<double>());
        os << '\n';
    }
}

// ---------- experiment ----------

struct ExperimentOpts {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    int threads = 0;
    std::string format;
};

struct ExperimentEnv {
    json config;
    uint64_t seed = 0;
    std::string out;
    int threads = 1;
    std::string format = "csv";
    std::string config_hash;
};

cmc::MetadataRows experiment_metadata(const ExperimentEnv& env) {
    auto meta = base_metadata(env.seed);
    meta.emplace_back("config_hash", env.config_hash);
    return meta;
}

void run_error_curve(const ExperimentEnv& env) {
    const cmc::Preset p = cmc::get_preset(env.config.at("preset").get<std::string>());
    const std::vector<int> m_grid = env.config.at("m_grid").get<std::vector<int>>();
    const int reps = env.config.at("replications").get<int>();
    if (m_grid.empty() || reps < 1) throw ConfigError("error-curve needs m_grid and replications");
    auto os = open_out(env.out);
    auto meta = experiment_metadata(env);
    meta.emplace_back("preset", p.name);
    cmc::write_metadata(os, meta);
    os << "m,seed,sup_error,T,zeta1,zeta2,C_delta\n";
    const double T = p.has_constants ? p.constants.T : std::nan("");
    const double z1 = p.has_constants ? p.constants.zeta1 : std::nan("");
    const double z2 = p.has_constants ? p.constants.zeta2 : std::nan("");
    const double cd = p.has_constants ? p.constants.C_delta() : std::nan("");
    for (size_t gi = 0; gi < m_grid.size(); ++gi) {
        std::vector<double> errs(reps);
        parallel_replications(reps, env.threads, [&](int r) {
            const uint64_t child =
                cmc::derive_child_seed(env.seed, gi * static_cast<uint64_t>(reps) + r);
            const cmc::Trajectory traj =
                cmc::simulate(p.model, p.policy, p.d0, m_grid[gi], child);
            const cmc::EstimatedModel est = cmc::estimate(
                cmc::count(traj, p.model.d, p.model.k, cmc::restart_period(p.policy)));
            errs[r] = cmc::estimation_error(est, p.model).sup_error;
        });
        for (int r = 0; r < reps; ++r)
            os << m_grid[gi] << ',' << r << ',' << cmc::format_double(errs[r]) << ','
               << cmc::format_double(T) << ',' << cmc::format_double(z1) << ','
               << cmc::format_double(z2) << ',' << cmc::format_double(cd) << '\n';
    }
}

void run_pac_validation(const ExperimentEnv& env) {
    const cmc::Preset p = cmc::get_preset(env.config.at("preset").get<std::string>());
    if (!p.has_constants) throw ConfigError("pac-validation needs a preset with constants");
    const double eps = env.config.at("eps").get<double>();
    const double delta = env.config.at("delta").get<double>();
    const double c = env.config.value("c", 1.0);
    const int reps = env.config.at("replications").get<int>();
    const cmc::BoundInputs in =
        cmc::to_bound_inputs(p.constants, p.model.d, p.model.k, eps, delta, 1.0, c, 1.0);
    const double m_star = cmc::sample_size_hoeffding(in);
    const int m = static_cast<int>(std::ceil(m_star));
    std::vector<uint8_t> fail(reps, 0);
    parallel_replications(reps, env.threads, [&](int r) {
        const cmc::Trajectory traj =
            cmc::simulate(p.model, p.policy, p.d0, m, cmc::derive_child_seed(env.seed, r));
        const cmc::EstimatedModel est = cmc::estimate(
                cmc::count(traj, p.model.d, p.model.k, cmc::restart_period(p.policy)));
        fail[r] = cmc::estimation_error(est, p.model).sup_error > eps ? 1 : 0;
    });
    int failures = 0;
    for (uint8_t f : fail) failures += f;
    const double rate = static_cast<double>(failures) / reps;
    const bool pass = rate <= delta + 2.0 * std::sqrt(delta / reps);
    if (env.format == "csv") {
        auto os = open_out(env.out);
        auto meta = experiment_metadata(env);
        meta.emplace_back("preset", p.name);
        cmc::write_metadata(os, meta);
        os << "m_star,empirical_failure_rate,delta,pass\n";
        os << cmc::format_double(m_star) << ',' << cmc::format_double(rate) << ','
           << cmc::format_double(delta) << ',' << (pass ? 1 : 0) << '\n';
        return;
    }
    cmc::write_json_file(env.out, json{{"m_star", m_star},
                                       {"empirical_failure_rate", rate},
                                       {"delta", delta},
                                       {"pass", pass}});
}

void run_mixing_report_experiment(const ExperimentEnv& env) {
    const cmc::Preset p = cmc::get_preset(env.config.at("preset").get<std::string>());
    const int m = env.config.at("m").get<int>();
    const int64_t cap = env.config.value("max_paths", cmc::kDefaultEnumerationCap);
    const cmc::MixingReport report =
        cmc::compute_mixing_report(p.model, p.policy, p.d0, m, cap);
    if (env.format == "json") {
        cmc::write_json_file(env.out, cmc::mixing_report_to_json(report));
        return;
    }
    auto os = open_out(env.out);
    auto meta = experiment_metadata(env);
    meta.emplace_back("preset", p.name);
    meta.emplace_back("delta_norm", cmc::format_double(report.delta_norm));
    cmc::write_metadata(os, meta);
    os << "i,j,eta_bar,phi,theta_bar\n";
    for (int i = 0; i <= report.m; ++i)
        for (int j = i + 1; j <= report.m; ++j)
            os << i << ',' << j << ',' << cmc::format_double(report.eta_bar(i, j)) << ','
               << cmc::format_double(report.phi(i, j)) << ','
               << cmc::format_double(report.theta_bar(i, j)) << '\n';
}

void run_cover_time_experiment_kind(const ExperimentEnv& env) {
    cmc::PerturbedFamilyParams params;
    params.d = env.config.value("d", 6);
    params.k = env.config.value("k", 2);
    params.iota = env.config.value("iota", 0.3);
    params.eps = env.config.value("eps", 0.01);
    params.xi = cmc::block_preset_params(params.d, params.k).xi;
    const std::vector<int64_t> n_grid = env.config.at("n_grid").get<std::vector<int64_t>>();
    const int reps = env.config.at("replications").get<int>();
    auto os = open_out(env.out);
    auto meta = experiment_metadata(env);
    meta.emplace_back("d", std::to_string(params.d));
    meta.emplace_back("k", std::to_string(params.k));
    meta.emplace_back("iota", cmc::format_double(params.iota));
    meta.emplace_back("replications", std::to_string(reps));
    bool first = true;
    for (size_t i = 0; i < n_grid.size(); ++i) {
        const cmc::CoverTimeResult r = cmc::cover_time_experiment(
            params, n_grid[i], reps, cmc::derive_child_seed(env.seed, i), env.threads);
        if (first) {
            meta.emplace_back("threshold_statement", cmc::format_double(r.threshold_statement));
            meta.emplace_back("threshold_proof", cmc::format_double(r.threshold_proof));
            cmc::write_metadata(os, meta);
            os << "n,survival,ci_low,ci_high\n";
            first = false;
        }
        os << r.n << ',' << cmc::format_double(r.survival) << ','
           << cmc::format_double(r.ci_low) << ',' << cmc::format_double(r.ci_high) << '\n';
    }
}

void run_ope_eval(const ExperimentEnv& env) {
    const cmc::Preset p = cmc::get_preset(env.config.at("preset").get<std::string>());
    const int m = env.config.at("m").get<int>();
    const double alpha = env.config.at("alpha").get<double>();
    const int reps = env.config.at("replications").get<int>();
    // Target policy: uniform over controls; cost: state index (so values are
    // state-dependent and plug-in error is visible).
    cmc::Matrix Pi(p.model.d, p.model.k, 1.0 / p.model.k);
    cmc::Matrix g_tilde(p.model.d, p.model.k);
    if (env.config.contains("g_tilde")) {
        g_tilde = cmc::matrix_from_json(env.config.at("g_tilde"));
    } else {
        for (int s = 0; s < p.model.d; ++s)
            for (int l = 0; l < p.model.k; ++l) g_tilde(s, l) = static_cast<double>(s + 1);
    }
    const cmc::OpeProblem problem = cmc::compose_policy(p.model, Pi, g_tilde, alpha);
    const std::vector<double> V = cmc::solve_value(problem);
    struct Row {
        double err, bound, res, res_hat;
    };
    std::vector<Row> rows(reps);
    parallel_replications(reps, env.threads, [&](int r) {
        const cmc::Trajectory traj =
            cmc::simulate(p.model, p.policy, p.d0, m, cmc::derive_child_seed(env.seed, r));
        const cmc::EstimatedModel est = cmc::estimate(
                cmc::count(traj, p.model.d, p.model.k, cmc::restart_period(p.policy)));
        const cmc::OpeProblem plugged = cmc::compose_plug_in(est, Pi, g_tilde, alpha);
        const std::vector<double> V_hat = cmc::solve_value(plugged);
        double err = 0.0;
        for (size_t s = 0; s < V.size(); ++s) err = std::max(err, std::abs(V_hat[s] - V[s]));
        rows[r] = {err, cmc::perturbation_bound(problem.M, plugged.M, problem.g, alpha),
                   cmc::bellman_residual(problem, V), cmc::bellman_residual(plugged, V_hat)};
    });
    auto os = open_out(env.out);
    auto meta = experiment_metadata(env);
    meta.emplace_back("preset", p.name);
    meta.emplace_back("alpha", cmc::format_double(alpha));
    meta.emplace_back("m", std::to_string(m));
    if (p.has_constants) {
        meta.emplace_back("T_alpha",
                          cmc::format_double(cmc::t_alpha(problem.g, p.model.d, alpha,
                                                          p.constants.T)));
    }
    cmc::write_metadata(os, meta);
    os << "seed,sup_value_error,perturbation_bound,bellman_residual,bellman_residual_hat\n";
    for (int r = 0; r < reps; ++r)
        os << r << ',' << cmc::format_double(rows[r].err) << ','
           << cmc::format_double(rows[r].bound) << ',' << cmc::format_double(rows[r].res) << ','
           << cmc::format_double(rows[r].res_hat) << '\n';
}

void run_greedy_pipeline(const ExperimentEnv& env) {
    const cmc::Preset p =
        cmc::get_preset(env.config.value("preset", std::string("greedy-3x2")));
    const auto* greedy = std::get_if<cmc::Greedy>(&p.policy.v);
    if (!greedy) throw ConfigError("greedy-pipeline needs a greedy preset");
    const double upsilon = greedy->upsilon;
    const int m = env.config.at("m").get<int>();
    const int reps = env.config.at("replications").get<int>();
    struct Row {
        double recovery, top_left;
    };
    std::vector<Row> rows(reps);
    parallel_replications(reps, env.threads, [&](int r) {
        const uint64_t child = cmc::derive_child_seed(env.seed, r);
        const cmc::Trajectory traj = cmc::simulate(p.model, p.policy, p.d0, m, child);
        const cmc::Trajectory aug = cmc::greedy_transform(traj, p.model.d, p.model.k,
                                                          cmc::derive_child_seed(child, 1));
        const cmc::EstimatedModel est =
            cmc::estimate(cmc::count(aug, 2 * p.model.d, p.model.k));
        const cmc::GreedyRecovery rec = cmc::recover_greedy_M(est.model, upsilon);
        double err = 0.0;
        for (int l = 0; l < p.model.k; ++l)
            err = std::max(err, cmc::sup_norm_diff(rec.raw[l], p.model.matrices[l]));
        double dev = 0.0;
        const double want = (1.0 - upsilon) / p.model.d;
        for (int l = 0; l < p.model.k; ++l)
            for (int s = 0; s < p.model.d; ++s)
                for (int t = 0; t < p.model.d; ++t)
                    dev = std::max(dev, std::abs(est.model.matrices[l](s, t) - want));
        rows[r] = {err, dev};
    });
    auto os = open_out(env.out);
    auto meta = experiment_metadata(env);
    meta.emplace_back("preset", p.name);
    meta.emplace_back("upsilon", cmc::format_double(upsilon));
    meta.emplace_back("m", std::to_string(m));
    cmc::write_metadata(os, meta);
    os << "seed,recovery_sup_error,top_left_max_dev\n";
    for (int r = 0; r < reps; ++r)
        os << r << ',' << cmc::format_double(rows[r].recovery) << ','
           << cmc::format_double(rows[r].top_left) << '\n';
}

void run_experiment(const ExperimentOpts& opt) {
    ExperimentEnv env;
    env.config = cmc::read_json_file(opt.config_path);
    env.config_hash = hex64(cmc::fnv1a64(env.config.dump()));
    env.seed = opt.seed_set ? opt.seed : env.config.value("seed", 0ull);
    env.out = !opt.out.empty() ? opt.out : env.config.value("out", std::string());
    env.threads = opt.threads > 0 ? opt.threads : env.config.value("threads", 1);
    env.format = !opt.format.empty() ? opt.format : env.config.value("format", std::string("csv"));
    if (env.out.empty()) throw ConfigError("experiment needs an output path (--out or config)");
    const std::string kind = env.config.value("kind", std::string());
    if (kind == "error-curve")
        run_error_curve(env);
    else if (kind == "pac-validation")
        run_pac_validation(env);
    else if (kind == "mixing-report")
        run_mixing_report_experiment(env);
    else if (kind == "cover-time")
        run_cover_time_experiment_kind(env);
    else if (kind == "ope-eval")
        run_ope_eval(env);
    else if (kind == "greedy-pipeline")
        run_greedy_pipeline(env);
    else
        throw ConfigError("unknown experiment kind: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"controlled-Markov-chain estimation toolkit"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* sim_cmd = app.add_subcommand("simulate", "sample a trajectory");
    add_source_flags(sim_cmd, sim.src);
    sim_cmd->add_option("--m", sim.m, "trajectory length")->required();
    sim_cmd->add_option("--seed", sim.seed, "master seed");
    sim_cmd->add_option("--scheme", sim.scheme, "direct|array")
        ->check(CLI::IsMember({"direct", "array"}));
    sim_cmd->add_option("--out", sim.out, "output file")->required();
    sim_cmd->add_option("--format", sim.format, "bin|csv|json")
        ->check(CLI::IsMember({"bin", "csv", "json"}));
    sim_cmd->callback([&] { run_simulate(sim); });

    EstimateOpts est;
    auto* est_cmd = app.add_subcommand("estimate", "estimate transition matrices from logs");
    est_cmd->add_option("--traj", est.traj_paths, "binary trajectory file (repeatable)")
        ->required();
    est_cmd->add_option("--truth", est.truth_path, "ground-truth model JSON for error reporting");
    est_cmd->add_option("--episode-len", est.episode_len,
                        "restart period of the logging process; transitions into restart steps are excluded")
        ->check(CLI::NonNegativeNumber);
    est_cmd->add_option("--out", est.out, "output file")->required();
    est_cmd->add_option("--format", est.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    est_cmd->callback([&] { run_estimate(est); });

    MixingOpts mix;
    auto* mix_cmd = app.add_subcommand("mixing", "exact mixing coefficients by enumeration");
    add_source_flags(mix_cmd, mix.src);
    mix_cmd->add_option("--m", mix.m, "horizon")->required();
    mix_cmd->add_option("--max-paths", mix.max_paths, "enumeration cap");
    mix_cmd->add_option("--out", mix.out, "output file")->required();
    mix_cmd->add_option("--format", mix.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    mix_cmd->callback([&] { run_mixing(mix); });

    BoundsOpts bnd;
    auto* bnd_cmd = app.add_subcommand("bounds", "per-class constants and sample-size table");
    bnd_cmd->add_option("--preset", bnd.presets, "preset name (repeatable; default: all)");
    bnd_cmd->add_option("--eps", bnd.eps, "target sup-norm accuracy");
    bnd_cmd->add_option("--delta", bnd.delta, "failure probability");
    bnd_cmd->add_option("--c", bnd.c, "leading constant");
    bnd_cmd->add_option("--C-pel", bnd.C_pel, "Bernstein constant");
    bnd_cmd->add_option("--rho-star", bnd.rho_star, "pair occupancy ceiling");
    bnd_cmd->add_option("--out", bnd.out, "output file")->required();
    bnd_cmd->add_option("--format", bnd.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    bnd_cmd->callback([&] { run_bounds(bnd); });

    HardnessOpts hard;
    auto* hard_cmd = app.add_subcommand("hardness", "lower-bound instance families");
    hard_cmd->add_option("--family", hard.family, "sigma|block")
        ->check(CLI::IsMember({"sigma", "block"}));
    hard_cmd->add_option("--d", hard.d, "state count (sigma: body size d; block: d)");
    hard_cmd->add_option("--k", hard.k, "control count (block)");
    hard_cmd->add_option("--p-star", hard.p_star, "sigma family return mass");
    hard_cmd->add_option("--eps", hard.eps, "perturbation size");
    hard_cmd->add_option("--iota", hard.iota, "block family mixing mass");
    hard_cmd->add_option("--sigma", hard.sigma_str, "sign string, e.g. ++-");
    hard_cmd->add_option("--xi", hard.xi_strs, "per-control sign string (repeatable)");
    hard_cmd->add_option("--emit", hard.emit_path, "write the instance model JSON here");
    hard_cmd->add_option("--gv-length", hard.gv_length, "emit a Gilbert-Varshamov code of this length");
    hard_cmd->add_option("--gv-min-dist", hard.gv_min_dist, "pairwise Hamming floor (default n/8)");
    hard_cmd->add_option("--cover-n", hard.cover_n, "horizon for P(touring > n) (repeatable)");
    hard_cmd->add_option("--replications", hard.replications, "Monte Carlo replications");
    hard_cmd->add_option("--seed", hard.seed, "master seed");
    hard_cmd->add_option("--threads", hard.threads, "worker threads");
    hard_cmd->add_option("--out", hard.out, "output file");
    hard_cmd->add_option("--format", hard.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    hard_cmd->callback([&] { run_hardness(hard); });

    OpeOpts ope;
    auto* ope_cmd = app.add_subcommand("ope", "discounted policy evaluation");
    ope_cmd->add_option("--model", ope.model_path, "ground-truth model JSON")->required();
    ope_cmd->add_option("--est", ope.est_path, "estimated model JSON (enables V_hat)");
    ope_cmd->add_option("--policy-matrix", ope.policy_matrix_path, "d x k policy matrix JSON")
        ->required();
    ope_cmd->add_option("--cost", ope.cost_path, "state,control,cost CSV")->required();
    ope_cmd->add_option("--alpha", ope.alpha, "discount factor")->required();
    ope_cmd->add_option("--preset", ope.preset, "preset supplying class constants for thresholds");
    ope_cmd->add_option("--eps", ope.eps, "value-accuracy target for the threshold");
    ope_cmd->add_option("--delta", ope.delta, "failure probability for the threshold");
    ope_cmd->add_option("--out", ope.out, "output file")->required();
    ope_cmd->add_option("--format", ope.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    ope_cmd->callback([&] { run_ope(ope); });

    ExperimentOpts exp;
    auto* exp_cmd = app.add_subcommand("experiment", "run a configured experiment");
    exp_cmd->add_option("--config", exp.config_path, "experiment config JSON")->required();
    auto* seed_opt = exp_cmd->add_option("--seed", exp.seed, "override config seed");
    exp_cmd->add_option("--out", exp.out, "override config output path");
    exp_cmd->add_option("--threads", exp.threads, "override config threads");
    exp_cmd->add_option("--format", exp.format, "override config format")
        ->check(CLI::IsMember({"csv", "json"}));
    exp_cmd->callback([&] {
        exp.seed_set = seed_opt->count() > 0;
        run_experiment(exp);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const cmc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
