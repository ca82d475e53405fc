#include "cmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

#include "cmc/errors.hpp"

namespace cmc {

using nlohmann::json;

// ---------- json ----------

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols; ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw IoError("matrix JSON must be a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw IoError("ragged matrix JSON");
        for (int c = 0; c < cols; ++c)
            M(r, c) = j[r][c].is_null() ? std::nan("") : j[r][c].get<double>();
    }
    return M;
}

json model_to_json(const CmcModel& model) {
    json matrices = json::array();
    for (const Matrix& M : model.matrices) matrices.push_back(matrix_to_json(M));
    return json{{"d", model.d}, {"k", model.k}, {"matrices", std::move(matrices)}};
}

CmcModel model_from_json(const json& j) {
    CmcModel model;
    try {
        model.d = j.at("d").get<int>();
        model.k = j.at("k").get<int>();
        for (const auto& mj : j.at("matrices")) model.matrices.push_back(matrix_from_json(mj));
    } catch (const json::exception& e) {
        throw IoError(std::string("bad model JSON: ") + e.what());
    }
    validate_model(model);
    return model;
}

namespace {

json distribution_to_json(const Distribution& d0) { return json(d0.w); }

Distribution distribution_from_json(const json& j) {
    Distribution d0;
    d0.w = j.get<std::vector<double>>();
    return d0;
}

json tables_to_json(const std::vector<Matrix>& tables) {
    json out = json::array();
    for (const Matrix& t : tables) out.push_back(matrix_to_json(t));
    return out;
}

std::vector<Matrix> tables_from_json(const json& j) {
    std::vector<Matrix> out;
    for (const auto& tj : j) out.push_back(matrix_from_json(tj));
    return out;
}

}  // namespace

json policy_to_json(const LoggingPolicy& policy) {
    json j{{"type", policy.kind()}};
    if (const auto* p = std::get_if<StationaryRandomized>(&policy.v)) {
        j["P"] = matrix_to_json(p->P);
    } else if (const auto* p = std::get_if<DeterministicSchedule>(&policy.v)) {
        j[p->periodic ? "periodic" : "sequence"] = p->seq;
        if (p->window != 0) j["window"] = p->window;
    } else if (const auto* p = std::get_if<NonStationaryMarkov>(&policy.v)) {
        j["tables"] = tables_to_json(p->tables);
    } else if (const auto* p = std::get_if<Episodic>(&policy.v)) {
        j["H"] = p->H;
        j["within"] = tables_to_json(p->within.tables);
        j["restart"] = distribution_to_json(p->restart);
    } else if (const auto* p = std::get_if<Greedy>(&policy.v)) {
        j["upsilon"] = p->upsilon;
        j["base"] = matrix_to_json(p->base);
    }
    return j;
}

LoggingPolicy policy_from_json(const json& j) {
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "stationary") return make_stationary_policy(matrix_from_json(j.at("P")));
        if (type == "schedule") {
            const bool periodic = j.contains("periodic");
            const json& seq = periodic ? j.at("periodic") : j.at("sequence");
            return make_schedule_policy(seq.get<std::vector<int>>(), periodic,
                                        j.value("window", 0));
        }
        if (type == "markov") return make_markov_policy(tables_from_json(j.at("tables")));
        if (type == "episodic")
            return make_episodic_policy(j.at("H").get<int>(), tables_from_json(j.at("within")),
                                        distribution_from_json(j.at("restart")));
        if (type == "greedy")
            return make_greedy_policy(j.at("upsilon").get<double>(),
                                      matrix_from_json(j.at("base")));
        throw IoError("unknown policy type: " + type);
    } catch (const json::exception& e) {
        throw IoError(std::string("bad policy JSON: ") + e.what());
    }
}

json estimated_to_json(const EstimatedModel& est) {
    json j = model_to_json(est.model);
    json rows = json::array();
    for (const auto& [s, l] : est.undefined_rows) rows.push_back(json::array({s, l}));
    j["undefined_rows"] = std::move(rows);
    return j;
}

EstimatedModel estimated_from_json(const json& j) {
    EstimatedModel est;
    est.model = model_from_json(j);
    try {
        for (const auto& row : j.at("undefined_rows"))
            est.undefined_rows.emplace_back(row.at(0).get<int>(), row.at(1).get<int>());
    } catch (const json::exception& e) {
        throw IoError(std::string("bad estimate JSON: ") + e.what());
    }
    return est;
}

json mixing_report_to_json(const MixingReport& report) {
    json gammas = json::array();
    for (const Matrix& g : report.gamma) gammas.push_back(matrix_to_json(g));
    return json{{"d", report.d},
                {"k", report.k},
                {"m", report.m},
                {"d0", json(report.d0.w)},
                {"eta_bar", matrix_to_json(report.eta_bar)},
                {"phi", matrix_to_json(report.phi)},
                {"theta_bar", matrix_to_json(report.theta_bar)},
                {"gamma", std::move(gammas)},
                {"delta_norm", report.delta_norm}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("short write to " + path);
}

// ---------- csv ----------

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_metadata(std::ostream& os, const MetadataRows& rows) {
    for (const auto& [key, value] : rows) os << "# " << key << '=' << value << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const MetadataRows& metadata) {
    write_metadata(os, metadata);
    const bool with_omega = !traj.omega.empty();
    os << (with_omega ? "i,X_i,a_i,omega_i\n" : "i,X_i,a_i\n");
    for (size_t i = 0; i < traj.states.size(); ++i) {
        os << i << ',' << traj.states[i] << ',' << traj.controls[i];
        if (with_omega) os << ',' << static_cast<int>(traj.omega[i]);
        os << '\n';
    }
}

// ---------- binary trajectories ----------

namespace {

constexpr char kMagic[4] = {'C', 'M', 'T', 'J'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) throw IoError("truncated " + path);
    return v;
}

}  // namespace

void write_trajectory_binary(const std::string& path, const Trajectory& traj,
                             const TrajectoryHeader& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    put<uint32_t>(out, kVersion);
    put<uint32_t>(out, static_cast<uint32_t>(header.d));
    put<uint32_t>(out, static_cast<uint32_t>(header.k));
    put<uint64_t>(out, static_cast<uint64_t>(traj.m()));
    put<uint64_t>(out, traj.seed);
    put<uint64_t>(out, header.policy_hash);
    put<uint8_t>(out, traj.omega.empty() ? 0 : 1);
    for (int32_t x : traj.states) put<uint32_t>(out, static_cast<uint32_t>(x));
    for (int32_t a : traj.controls) put<uint32_t>(out, static_cast<uint32_t>(a));
    for (uint8_t w : traj.omega) put<uint8_t>(out, w);
    if (!out) throw IoError("short write to " + path);
}

Trajectory read_trajectory_binary(const std::string& path, TrajectoryHeader* header_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError(path + " is not a trajectory file");
    if (get<uint32_t>(in, path) != kVersion) throw IoError(path + ": unsupported version");
    TrajectoryHeader header;
    header.d = static_cast<int>(get<uint32_t>(in, path));
    header.k = static_cast<int>(get<uint32_t>(in, path));
    const uint64_t m = get<uint64_t>(in, path);
    Trajectory traj;
    traj.seed = get<uint64_t>(in, path);
    header.policy_hash = get<uint64_t>(in, path);
    const uint8_t with_omega = get<uint8_t>(in, path);
    traj.states.resize(m + 1);
    traj.controls.resize(m + 1);
    for (auto& x : traj.states) x = static_cast<int32_t>(get<uint32_t>(in, path));
    for (auto& a : traj.controls) a = static_cast<int32_t>(get<uint32_t>(in, path));
    if (with_omega) {
        traj.omega.resize(m + 1);
        for (auto& w : traj.omega) w = get<uint8_t>(in, path);
    }
    if (header_out) *header_out = header;
    return traj;
}

// ---------- hashing ----------

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t hash_policy(const LoggingPolicy& policy) { return fnv1a64(policy_to_json(policy).dump()); }

}  // namespace cmc
