#include <cmath>
#include <gtest/gtest.h>

#include <set>

#include "pvvasm/rng.hpp"

using namespace pvvasm;

TEST(Substream, DeterministicAndDistinct) {
    EXPECT_EQ(substream(7, 1, 2), substream(7, 1, 2));
    std::set<Seed> seen;
    for (std::uint64_t a = 0; a < 50; ++a) {
        for (std::uint64_t b = 0; b < 50; ++b) seen.insert(substream(7, a, b));
    }
    EXPECT_EQ(seen.size(), 2500u);
    EXPECT_NE(substream(7, 1, 2), substream(8, 1, 2));
    EXPECT_NE(substream(7, 1, 2), substream(7, 2, 1));
}

TEST(Uniform, Ranges) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(rng);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(uniform_index(rng, 7), 7u);
    }
    EXPECT_EQ(uniform_index(rng, 1), 0u);
}

TEST(UniformIndex, RoughlyUniform) {
    Rng rng(2);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[uniform_index(rng, 10)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(FastRng, ReproducibleAndSeedSensitive) {
    FastRng a(5);
    FastRng b(5);
    FastRng c(6);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differs |= x != c();
    }
    EXPECT_TRUE(differs);
}
