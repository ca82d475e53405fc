#include "cmc/policies.hpp"

#include <cmath>
#include <string>

namespace cmc {

namespace {

void check_table(const Matrix& P, int d, int k, const char* what) {
    if (P.rows != d || P.cols != k)
        throw DimensionMismatch(std::string(what) + ": table must be d x k");
    for (int s = 0; s < d; ++s) {
        for (int l = 0; l < k; ++l)
            if (P(s, l) < 0.0)
                throw NegativeEntryError(std::string(what) + ": negative probability");
        if (std::abs(P.row_sum(s) - 1.0) > kRowSumTol)
            throw RowSumError(std::string(what) + ": row " + std::to_string(s) +
                              " does not sum to 1");
    }
}

const Matrix& markov_table(const NonStationaryMarkov& p, int i) {
    int n = static_cast<int>(p.tables.size());
    return p.tables[i < n ? i : n - 1];
}

const Matrix& episodic_table(const Episodic& p, int offset) {
    int n = static_cast<int>(p.within.tables.size());
    int idx = offset - 1;  // offset runs 1..H-1
    return p.within.tables[idx < n ? idx : n - 1];
}

Distribution point_mass(int k, int l) {
    Distribution dist{std::vector<double>(k, 0.0)};
    dist.w[l] = 1.0;
    return dist;
}

}  // namespace

const char* LoggingPolicy::kind() const {
    switch (v.index()) {
        case 0: return "stationary";
        case 1: return "schedule";
        case 2: return "markov";
        case 3: return "episodic";
        default: return "greedy";
    }
}

void validate_policy(const LoggingPolicy& policy, int d, int k) {
    if (const auto* p = std::get_if<StationaryRandomized>(&policy.v)) {
        check_table(p->P, d, k, "stationary policy");
    } else if (const auto* p = std::get_if<DeterministicSchedule>(&policy.v)) {
        if (p->seq.empty()) throw InvalidParameter("schedule policy: empty sequence");
        for (int l : p->seq)
            if (l < 0 || l >= k) throw InvalidParameter("schedule policy: control out of range");
    } else if (const auto* p = std::get_if<NonStationaryMarkov>(&policy.v)) {
        if (p->tables.empty()) throw InvalidParameter("markov policy: no tables");
        for (const Matrix& t : p->tables) check_table(t, d, k, "markov policy");
    } else if (const auto* p = std::get_if<Episodic>(&policy.v)) {
        if (p->H < 1) throw InvalidParameter("episodic policy: H must be >= 1");
        if (p->within.tables.empty()) throw InvalidParameter("episodic policy: no tables");
        for (const Matrix& t : p->within.tables) check_table(t, d, k, "episodic policy");
        if (p->restart.size() != d * k)
            throw DimensionMismatch("episodic policy: restart distribution must cover d*k pairs");
        validate_distribution(p->restart);
    } else if (const auto* p = std::get_if<Greedy>(&policy.v)) {
        if (!(p->upsilon > 0.0 && p->upsilon < 1.0))
            throw InvalidUpsilon("greedy policy: upsilon must lie in (0,1)");
        check_table(p->base, d, k, "greedy base policy");
    }
}

bool restarts_at(const LoggingPolicy& policy, int i) {
    const auto* p = std::get_if<Episodic>(&policy.v);
    return p != nullptr && i % p->H == 0;
}

int restart_period(const LoggingPolicy& policy) {
    const auto* p = std::get_if<Episodic>(&policy.v);
    return p == nullptr ? 0 : p->H;
}

const Distribution& restart_law(const LoggingPolicy& policy) {
    return std::get<Episodic>(policy.v).restart;
}

Distribution control_law(const LoggingPolicy& policy, int k, int i, int x,
                         const HistoryView& history) {
    (void)history;  // no variant's law reads beyond (i, x); kept for interface parity
    if (const auto* p = std::get_if<StationaryRandomized>(&policy.v)) {
        Distribution dist{std::vector<double>(k)};
        for (int l = 0; l < k; ++l) dist.w[l] = p->P(x, l);
        return dist;
    }
    if (const auto* p = std::get_if<DeterministicSchedule>(&policy.v))
        return point_mass(k, schedule_control(*p, i));
    if (const auto* p = std::get_if<NonStationaryMarkov>(&policy.v)) {
        const Matrix& t = markov_table(*p, i);
        Distribution dist{std::vector<double>(k)};
        for (int l = 0; l < k; ++l) dist.w[l] = t(x, l);
        return dist;
    }
    if (const auto* p = std::get_if<Episodic>(&policy.v)) {
        int offset = i % p->H;
        if (offset == 0) {
            // restart index: conditional of the joint restart law given X_i = x
            Distribution dist{std::vector<double>(k)};
            double total = 0.0;
            for (int l = 0; l < k; ++l) total += p->restart.w[x * k + l];
            if (total <= 0.0)
                throw InvalidParameter("episodic restart law gives state " + std::to_string(x) +
                                       " zero mass");
            for (int l = 0; l < k; ++l) dist.w[l] = p->restart.w[x * k + l] / total;
            return dist;
        }
        const Matrix& t = episodic_table(*p, offset);
        Distribution dist{std::vector<double>(k)};
        for (int l = 0; l < k; ++l) dist.w[l] = t(x, l);
        return dist;
    }
    const auto& p = std::get<Greedy>(policy.v);
    // mixture: explore uniformly w.p. upsilon, else follow the base table
    Distribution dist{std::vector<double>(k)};
    for (int l = 0; l < k; ++l) dist.w[l] = (1.0 - p.upsilon) * p.base(x, l) + p.upsilon / k;
    return dist;
}

int next_control(const LoggingPolicy& policy, int k, int i, int x, const HistoryView& history,
                 Philox& rng, int* omega_out) {
    if (const auto* p = std::get_if<Greedy>(&policy.v)) {
        int omega = rng.bernoulli(p->upsilon) ? 1 : 0;
        if (omega_out != nullptr) *omega_out = omega;
        if (omega == 1) return rng.next_index(k);
        const double* row = &p->base.a[static_cast<size_t>(x) * k];
        return rng.sample(row, k);
    }
    if (const auto* p = std::get_if<DeterministicSchedule>(&policy.v))
        return schedule_control(*p, i);
    Distribution law = control_law(policy, k, i, x, history);
    return rng.sample(law.w);
}

int schedule_control(const DeterministicSchedule& sched, int i) {
    int n = static_cast<int>(sched.seq.size());
    if (sched.periodic) return sched.seq[i % n];
    return sched.seq[i < n ? i : n - 1];
}

bool verify_revisit_window(const std::vector<int>& schedule, int window, int k) {
    int m = static_cast<int>(schedule.size()) - 1;
    if (window > m)
        throw WindowTooLong("revisit window " + std::to_string(window) +
                            " exceeds schedule length " + std::to_string(m));
    std::vector<int> counts(k);
    for (int j = 0; j + window <= m; ++j) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = j; i <= j + window; ++i) ++counts[schedule[i]];
        for (int l = 0; l < k; ++l)
            if (counts[l] <= 1) return false;
    }
    return true;
}

LoggingPolicy make_stationary_policy(Matrix P) {
    return LoggingPolicy{StationaryRandomized{std::move(P)}};
}

LoggingPolicy make_schedule_policy(std::vector<int> seq, bool periodic, int window) {
    return LoggingPolicy{DeterministicSchedule{std::move(seq), periodic, window}};
}

LoggingPolicy make_markov_policy(std::vector<Matrix> tables) {
    return LoggingPolicy{NonStationaryMarkov{std::move(tables)}};
}

LoggingPolicy make_episodic_policy(int H, std::vector<Matrix> within_tables, Distribution restart) {
    return LoggingPolicy{Episodic{H, NonStationaryMarkov{std::move(within_tables)}, std::move(restart)}};
}

LoggingPolicy make_greedy_policy(double upsilon, Matrix base) {
    return LoggingPolicy{Greedy{upsilon, std::move(base)}};
}

}  // namespace cmc
