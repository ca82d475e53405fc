#pragma once

#include <string>
#include <vector>

#include "cmc/bounds.hpp"
#include "cmc/hardness.hpp"
#include "cmc/model.hpp"
#include "cmc/policies.hpp"

namespace cmc {

// Canned model + policy + initial-law bundles used by the CLI (--preset) and
// the validation suites. Stationary and block presets start from the exact
// stationary pair law; everything else starts uniform.

struct Preset {
    std::string name;
    CmcModel model;
    LoggingPolicy policy;
    Distribution d0;  // initial law over (state, control) pairs
    ClassConstants constants;
    bool has_constants = false;
};

// Throws InvalidParameter for unknown names.
Preset get_preset(const std::string& name);

std::vector<std::string> preset_names();

// Parameters behind the block presets: iota = 0.3, eps = 0.01,
// xi^(l)_i = (l + i + 1) mod 2.
PerturbedFamilyParams block_preset_params(int d, int k);

}  // namespace cmc
