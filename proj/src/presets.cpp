#include "cmc/presets.hpp"

#include "cmc/errors.hpp"
#include "cmc/simulate.hpp"

namespace cmc {

namespace {

CmcModel make_model(int d, int k, std::vector<Matrix> matrices) {
    CmcModel model;
    model.d = d;
    model.k = k;
    model.matrices = std::move(matrices);
    validate_model(model);
    return model;
}

// d=3, k=2, everywhere-positive rows; the workhorse ergodic example.
CmcModel stationary_3x2_model() {
    return make_model(3, 2,
                      {Matrix::from_rows({{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}, {0.3, 0.3, 0.4}}),
                       Matrix::from_rows({{0.2, 0.5, 0.3}, {0.4, 0.2, 0.4}, {0.25, 0.25, 0.5}})});
}

Matrix stationary_3x2_controls() {
    return Matrix::from_rows({{0.6, 0.4}, {0.5, 0.5}, {0.3, 0.7}});
}

// d=2, k=2 with visibly different controls; drives the sampler-equivalence
// checks, schedules, and Markov tables.
CmcModel nonuniform_2x2_model() {
    return make_model(2, 2,
                      {Matrix::from_rows({{0.7, 0.3}, {0.2, 0.8}}),
                       Matrix::from_rows({{0.4, 0.6}, {0.9, 0.1}})});
}

Matrix nonuniform_2x2_controls() { return Matrix::from_rows({{0.6, 0.4}, {0.3, 0.7}}); }

// Both controls i.i.d. uniform in the state coordinate: every transition row
// is (1/2, 1/2), so the future is independent of the present pair.
CmcModel uniform_2x2_model() {
    return make_model(2, 2,
                      {Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                       Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})});
}

// Four states, two controls steering between the halves; under the
// alternating schedule the state law mixes while the pair law does not.
CmcModel parity_model() {
    return make_model(
        4, 2,
        {Matrix::from_rows({{0.5, 0.5, 0.0, 0.0},
                            {0.5, 0.5, 0.0, 0.0},
                            {0.0, 0.0, 0.5, 0.5},
                            {0.0, 0.0, 0.5, 0.5}}),
         Matrix::from_rows({{0.0, 0.0, 0.5, 0.5},
                            {0.0, 0.0, 0.5, 0.5},
                            {0.5, 0.5, 0.0, 0.0},
                            {0.5, 0.5, 0.0, 0.0}})});
}

// Three controls whose union over a period is ergodic even though each one
// alone has deterministic rows.
CmcModel aperiodic_trio_model() {
    const double t = 1.0 / 3.0;
    return make_model(3, 3,
                      {Matrix::from_rows({{0.0, 1.0, 0.0}, {t, t, t}, {t, t, t}}),
                       Matrix::from_rows({{t, t, t}, {0.0, 0.0, 1.0}, {t, t, t}}),
                       Matrix::from_rows({{t, t, t}, {t, t, t}, {1.0, 0.0, 0.0}})});
}

Distribution uniform_start(const LoggingPolicy& policy, int d, int k) {
    return joint_initial(policy, k, uniform_distribution(d));
}

Preset stationary_preset() {
    Preset p;
    p.name = "stationary-3x2";
    p.model = stationary_3x2_model();
    Matrix P = stationary_3x2_controls();
    p.policy = make_stationary_policy(P);
    const std::vector<double> pi = power_iteration_stationary(paired_chain(p.model, P));
    p.d0.w = pi;
    p.constants = stationary_class_constants(p.model, P, /*starts_stationary=*/true);
    p.has_constants = true;
    return p;
}

Preset schedule_preset() {
    Preset p;
    p.name = "schedule-2x2";
    p.model = nonuniform_2x2_model();
    p.policy = make_schedule_policy({0, 1}, /*periodic=*/true, /*window=*/3);
    p.d0 = uniform_start(p.policy, 2, 2);
    p.constants = schedule_class_constants(p.model, 3);
    p.has_constants = true;
    return p;
}

Preset markov_preset() {
    Preset p;
    p.name = "markov-2x2";
    p.model = nonuniform_2x2_model();
    p.policy = make_markov_policy({Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}),
                                   Matrix::from_rows({{0.8, 0.2}, {0.3, 0.7}}),
                                   Matrix::from_rows({{0.2, 0.8}, {0.6, 0.4}})});
    p.d0 = uniform_start(p.policy, 2, 2);
    return p;
}

Preset episodic_preset() {
    Preset p;
    p.name = "episodic-2x2";
    p.model = nonuniform_2x2_model();
    Distribution restart;
    restart.w = {0.3, 0.2, 0.3, 0.2};
    p.policy = make_episodic_policy(3,
                                    {Matrix::from_rows({{0.7, 0.3}, {0.4, 0.6}}),
                                     Matrix::from_rows({{0.5, 0.5}, {0.2, 0.8}})},
                                    restart);
    p.d0 = restart;
    p.constants = episodic_class_constants(2, 2, 3, 0.1, 0.9);
    p.has_constants = true;
    return p;
}

Preset greedy_preset() {
    Preset p;
    p.name = "greedy-3x2";
    p.model = stationary_3x2_model();
    const double upsilon = 0.3;
    Matrix base = Matrix::from_rows({{0.8, 0.2}, {0.3, 0.7}, {0.5, 0.5}});
    p.policy = make_greedy_policy(upsilon, base);
    p.d0 = uniform_start(p.policy, 3, 2);
    // Effective control rows are upsilon-mixed toward uniform; the resulting
    // pair chain's minimum stationary mass feeds the greedy constants.
    Matrix eff(3, 2);
    for (int s = 0; s < 3; ++s)
        for (int l = 0; l < 2; ++l) eff(s, l) = upsilon * 0.5 + (1.0 - upsilon) * base(s, l);
    const std::vector<double> pi = power_iteration_stationary(paired_chain(p.model, eff));
    double pi_min = 1.0;
    for (double v : pi) pi_min = std::min(pi_min, v);
    p.constants = greedy_class_constants(2, upsilon, pi_min);
    p.has_constants = true;
    return p;
}

Preset block_preset(int d, int k) {
    Preset p;
    p.name = "block-" + std::to_string(d) + "x" + std::to_string(k);
    const PerturbedFamilyParams params = block_preset_params(d, k);
    p.model = build_block_instance(params);
    p.policy = block_uniform_policy(d, k);
    p.d0 = block_pair_stationary(params);
    // T = 2dk/3iota (every row pushes 3iota/d onto each first-block state,
    // so every pair is revisited at that rate); zeta1 = zeta2 = iota exactly.
    p.constants.T = 2.0 * d * k / (3.0 * params.iota);
    p.constants.zeta1 = p.constants.zeta2 = params.iota;
    p.constants.C = 0.0;
    const Matrix uniformP(d, k, 1.0 / k);
    p.constants.C_theta = 1.0 / (1.0 - dobrushin_coefficient(paired_chain(p.model, uniformP)));
    p.has_constants = true;
    return p;
}

}  // namespace

PerturbedFamilyParams block_preset_params(int d, int k) {
    PerturbedFamilyParams params;
    params.d = d;
    params.k = k;
    params.iota = 0.3;
    params.eps = 0.01;
    params.xi.assign(k, std::vector<int>(d / 3, 0));
    for (int l = 0; l < k; ++l)
        for (int i = 0; i < d / 3; ++i) params.xi[l][i] = (l + i + 1) % 2;
    return params;
}

Preset get_preset(const std::string& name) {
    if (name == "stationary-3x2") return stationary_preset();
    if (name == "schedule-2x2") return schedule_preset();
    if (name == "markov-2x2") return markov_preset();
    if (name == "episodic-2x2") return episodic_preset();
    if (name == "greedy-3x2") return greedy_preset();
    if (name == "nonuniform-2x2") {
        Preset p;
        p.name = name;
        p.model = nonuniform_2x2_model();
        p.policy = make_stationary_policy(nonuniform_2x2_controls());
        p.d0 = uniform_start(p.policy, 2, 2);
        return p;
    }
    if (name == "uniform-2x2") {
        Preset p;
        p.name = name;
        p.model = uniform_2x2_model();
        p.policy = make_stationary_policy(nonuniform_2x2_controls());
        p.d0 = uniform_start(p.policy, 2, 2);
        return p;
    }
    if (name == "parity-counterexample") {
        Preset p;
        p.name = name;
        p.model = parity_model();
        p.policy = make_schedule_policy({0, 1}, /*periodic=*/true);
        p.d0 = uniform_start(p.policy, 4, 2);
        return p;
    }
    if (name == "aperiodic-trio") {
        Preset p;
        p.name = name;
        p.model = aperiodic_trio_model();
        p.policy = make_schedule_policy({0, 1, 2}, /*periodic=*/true);
        p.d0 = uniform_start(p.policy, 3, 3);
        return p;
    }
    if (name == "block-3x2") return block_preset(3, 2);
    if (name == "block-6x2") return block_preset(6, 2);
    throw ConfigError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
    return {"stationary-3x2", "schedule-2x2",  "markov-2x2",
            "episodic-2x2",   "greedy-3x2",    "nonuniform-2x2",
            "uniform-2x2",    "parity-counterexample", "aperiodic-trio",
            "block-3x2",      "block-6x2"};
}

}  // namespace cmc
