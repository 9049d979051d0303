#pragma once

#include <cstdint>
#include <random>

namespace pvvasm {

using Rng = std::mt19937_64;
using Seed = std::uint64_t;

// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed of substream (a, b) under a parent seed. Distinct (a, b) pairs give
// unrelated streams, so sampling order never depends on scheduling.
Seed substream(Seed parent, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01(rng);
}

// xoshiro256++ (Blackman and Vigna), seeded through SplitMix64. Used where
// the volume of draws makes the Mersenne Twister the bottleneck.
class FastRng {
public:
    using result_type = std::uint64_t;
    explicit FastRng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) noexcept;

}  // namespace pvvasm
