#include "pvvasm/rng.hpp"

namespace pvvasm {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

FastRng::FastRng(std::uint64_t seed) noexcept {
    // Consecutive SplitMix64 outputs.
    for (auto& w : s_) {
        w = mix64(seed);
        seed += 0x9E3779B97F4A7C15ULL;
    }
}

Seed substream(Seed parent, std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(mix64(parent) ^ a) + b);
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    u128 product = static_cast<u128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            product = static_cast<u128>(rng()) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace pvvasm
