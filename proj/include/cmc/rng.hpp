#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace cmc {

// ---------- counter-based random source ----------
// philox4x32-10: stateless 4x32-bit block function keyed by a 64-bit seed.
// Counter-based so replications are reproducible across platforms and the
// stream identity can be recorded in output metadata.

inline constexpr const char* kRngAlgorithm = "philox4x32-10";

class Philox {
public:
    explicit Philox(uint64_t seed)
        : key0_(static_cast<uint32_t>(seed)), key1_(static_cast<uint32_t>(seed >> 32)) {}

    // One application of the 10-round block function (exposed for known-answer tests).
    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> counter, uint32_t k0, uint32_t k1);

    uint32_t next_u32();
    uint64_t next_u64();

    // uniform on [0,1) with 53 random bits
    double next_double();

    // uniform on {0,...,n-1}, rejection sampled (no modulo bias)
    int next_index(int n);

    // index from an unnormalized nonnegative weight row via CDF inversion
    int sample(const double* w, int n);
    int sample(const std::vector<double>& w) { return sample(w.data(), static_cast<int>(w.size())); }

    bool bernoulli(double p) { return next_double() < p; }

private:
    void refill();

    uint32_t key0_, key1_;
    uint64_t counter_ = 0;
    std::array<uint32_t, 4> buf_{};
    int have_ = 0;
};

// ---------- seed derivation ----------
// All experiment randomness flows from one master seed; replication r uses
// derive_child_seed(master, r) so runs parallelize without stream overlap.

uint64_t splitmix64(uint64_t x);
uint64_t derive_child_seed(uint64_t master, uint64_t index);

}  // namespace cmc
