#include "cmc/rng.hpp"

namespace cmc {

namespace {
constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;
}  // namespace

std::array<uint32_t, 4> Philox::block(std::array<uint32_t, 4> c, uint32_t k0, uint32_t k1) {
    for (int round = 0; round < 10; ++round) {
        uint64_t p0 = static_cast<uint64_t>(kMul0) * c[0];
        uint64_t p1 = static_cast<uint64_t>(kMul1) * c[2];
        uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return c;
}

void Philox::refill() {
    buf_ = block({static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32), 0u, 0u},
                 key0_, key1_);
    ++counter_;
    have_ = 4;
}

uint32_t Philox::next_u32() {
    if (have_ == 0) refill();
    return buf_[4 - have_--];
}

uint64_t Philox::next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double Philox::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Philox::next_index(int n) {
    if (n <= 1) return 0;
    uint32_t un = static_cast<uint32_t>(n);
    uint32_t limit = UINT32_MAX - UINT32_MAX % un;
    uint32_t u;
    do {
        u = next_u32();
    } while (u >= limit);
    return static_cast<int>(u % un);
}

int Philox::sample(const double* w, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    double u = next_double() * total;
    double cum = 0.0;
    int last_positive = 0;
    for (int i = 0; i < n; ++i) {
        if (w[i] <= 0.0) continue;
        cum += w[i];
        last_positive = i;
        if (u < cum) return i;
    }
    return last_positive;  // float residue at u ~ total
}

uint64_t splitmix64(uint64_t x) {
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t derive_child_seed(uint64_t master, uint64_t index) {
    return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ull);
}

}  // namespace cmc
