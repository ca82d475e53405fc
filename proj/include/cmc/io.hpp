#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmc/estimate.hpp"
#include "cmc/mixing.hpp"
#include "cmc/model.hpp"
#include "cmc/policies.hpp"
#include "cmc/simulate.hpp"

namespace cmc {

// Serialization layer. JSON schemas:
//   model:     {"d": int, "k": int, "matrices": [k x d x d row-major]}
//   policy:    {"type": "stationary" | "schedule" | "markov" | "episodic" | "greedy", ...payload}
//              (periodic schedules abbreviate to {"type": "schedule", "periodic": [l_0, ...]})
//   estimate:  model schema + {"undefined_rows": [[s, l], ...]}
//   mixing:    nested arrays; NaN entries (outside the j > i triangle) emit as null
// All indices are 0-based on disk. CSV files open with "# key=value" metadata
// lines; floats print as %.17g so reruns are byte-comparable.

using MetadataRows = std::vector<std::pair<std::string, std::string>>;

// ---------- json ----------

nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const CmcModel& model);
CmcModel model_from_json(const nlohmann::json& j);

nlohmann::json policy_to_json(const LoggingPolicy& policy);
LoggingPolicy policy_from_json(const nlohmann::json& j);

nlohmann::json estimated_to_json(const EstimatedModel& est);
EstimatedModel estimated_from_json(const nlohmann::json& j);

nlohmann::json mixing_report_to_json(const MixingReport& report);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// ---------- csv ----------

std::string format_double(double v);
void write_metadata(std::ostream& os, const MetadataRows& rows);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const MetadataRows& metadata);

// ---------- binary trajectories ----------
// Layout: "CMTJ" magic, u32 version (1), u32 d, u32 k, u64 m, u64 seed,
// u64 policy hash, u8 omega flag, then m+1 u32 states, m+1 u32 controls and,
// when flagged, m+1 omega bytes. Little-endian throughout.

struct TrajectoryHeader {
    int d = 0;
    int k = 0;
    uint64_t policy_hash = 0;
};

void write_trajectory_binary(const std::string& path, const Trajectory& traj,
                             const TrajectoryHeader& header);
Trajectory read_trajectory_binary(const std::string& path, TrajectoryHeader* header_out = nullptr);

// ---------- hashing ----------

uint64_t fnv1a64(const std::string& bytes);

// FNV-1a over the policy's canonical JSON; stamped into trajectory headers so
// downstream stages can detect mismatched inputs.
uint64_t hash_policy(const LoggingPolicy& policy);

}  // namespace cmc
