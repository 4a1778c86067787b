#pragma once

// Deterministic pseudo-random stream used for seeded case generation.
// Hand-rolled (splitmix64) so identical seeds produce identical streams on
// every platform and standard library; the seeded-report contracts depend
// on that.

#include <cstdint>

namespace rdopt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Mixes tag words into a base seed; used to derive independent sub-streams
// (per law, per case, per experiment) whose results do not depend on
// evaluation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = base;
    splitmix64(s);
    s ^= 0x6a09e667f3bcc909ull * (a + 1);
    splitmix64(s);
    s ^= 0xbb67ae8584caa73bull * (b + 1);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Unbiased draw in [0, n); n >= 1.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Inclusive integer range.
    long range(long lo, long hi) {
        return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool coin() { return next_u64() & 1u; }

private:
    std::uint64_t state_;
};

} // namespace rdopt
